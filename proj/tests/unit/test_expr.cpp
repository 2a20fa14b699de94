#include "eikonal/expr.hpp"
#include "support/random_families.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace eikonal;
using namespace eikonal::expr;

namespace {

Expression parse2(const char* text) { return Expression::parse(text, {"z1", "z2"}); }

const Binary& as_binary(const Node& n) { return std::get<Binary>(n.data); }

} // namespace

TEST_CASE("parse builds the grammar-forced tree")
{
    const auto e = parse2("z1^2 + 3*z2");
    const auto& add = as_binary(e.root());
    CHECK(add.op == BinaryOp::Add);
    const auto& pow = as_binary(*add.lhs);
    CHECK(pow.op == BinaryOp::Pow);
    CHECK(std::get<Variable>(pow.lhs->data).index == 0);
    CHECK(std::get<Number>(pow.rhs->data).value == 2.0);
    const auto& mul = as_binary(*add.rhs);
    CHECK(mul.op == BinaryOp::Mul);
    CHECK(std::get<Number>(mul.lhs->data).value == 3.0);
    CHECK(std::get<Variable>(mul.rhs->data).index == 1);
}

TEST_CASE("power is right associative and binds tighter than unary minus")
{
    const auto e = Expression::parse("2^3^2", {"z"});
    const double p[] = {0.0};
    CHECK(e.value(p) == 512.0);
    CHECK(Expression::parse("-2^2", {"z"}).value(p) == -4.0);
    CHECK(Expression::parse("2^-1", {"z"}).value(p) == 0.5);
    CHECK(Expression::parse("8/4/2", {"z"}).value(p) == 1.0);
    CHECK(Expression::parse("1-2-3", {"z"}).value(p) == -4.0);
}

TEST_CASE("parse errors carry kind and byte offset")
{
    SUBCASE("incomplete input")
    {
        try {
            Expression::parse("z1 +", {"z1"});
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::Syntax);
            CHECK(e.position() == 4);
        }
    }
    SUBCASE("unknown identifier")
    {
        try {
            parse2("sin(q)");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::UnknownIdentifier);
            CHECK(std::string(e.what()).find("'q'") != std::string::npos);
            CHECK(e.position() == 4);
        }
    }
    SUBCASE("unknown function")
    {
        try {
            parse2("foo(z1)");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::UnknownFunction);
        }
    }
    SUBCASE("arity")
    {
        try {
            parse2("sin(z1, z2)");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(e.kind() == ParseError::Kind::Arity);
        }
    }
    CHECK_THROWS_AS(parse2(""), ParseError);
    CHECK_THROWS_AS(parse2("(z1"), ParseError);
    CHECK_THROWS_AS(parse2("z1 z2"), ParseError);
    CHECK_THROWS_AS(Expression::parse("z1", {"z1", "z1"}), std::invalid_argument);
    CHECK_THROWS_AS(Expression::parse("z1", {"a", "b", "c", "d"}), std::invalid_argument);
}

TEST_CASE("eval_jet on polynomials and products")
{
    const double p[] = {2.0, 1.0};
    const Jet2 j = eval_jet(parse2("z1^2 + 3*z2"), p);
    CHECK(j.value() == 7.0);
    CHECK(j.grad(0) == 4.0);
    CHECK(j.grad(1) == 3.0);
    CHECK(j.hess(0, 0) == 2.0);
    CHECK(j.hess(0, 1) == 0.0);
    CHECK(j.hess(1, 1) == 0.0);

    const double q[] = {0.0, 5.0};
    const Jet2 s = eval_jet(parse2("sin(z1)*z2"), q);
    CHECK(s.value() == 0.0);
    CHECK(s.grad(0) == 5.0);
    CHECK(s.grad(1) == 0.0);
    CHECK(s.hess(0, 0) == 0.0);
    CHECK(s.hess(0, 1) == 1.0);
    CHECK(s.hess(1, 0) == 1.0);
    CHECK(s.hess(1, 1) == 0.0);
}

TEST_CASE("constant expressions have zero derivatives")
{
    const auto e = parse2("2.5*pi - e");
    const double p[] = {0.3, -0.7};
    const Jet2 j = e.jet(p);
    CHECK(j.value() == doctest::Approx(2.5 * M_PI - M_E));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(j.grad(i) == 0.0);
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(j.hess(i, k) == 0.0);
    }
    CHECK(fd_check(Expression::parse("2.5", {"z1"}), std::vector<double>{0.4}, 1e-5).max() == 0.0);
}

TEST_CASE("fd_check against central differences")
{
    CHECK(fd_check(Expression::parse("exp(z1)", {"z1"}), std::vector<double>{0.3}, 1e-4).max() < 1e-7);
    CHECK(fd_check(parse2("z1*z2"), std::vector<double>{0.2, 0.4}, 1e-5).max() < 1e-9);
    CHECK(fd_check(Expression::parse("sin(3*z1)", {"z1"}), std::vector<double>{0.5}, 1e-4).max() < 1e-6);
}

TEST_CASE("every function differentiates correctly")
{
    for (const char* text : {"sin(z1*z2)", "cos(z1+z2)", "tan(z1)", "exp(z1-z2)", "log(2+z1)", "sqrt(2+z2)",
             "sinh(z1)", "cosh(z2)", "atan(z1*z2)", "(1+z1^2)^1.5", "z1/(2+z2)", "z2^-2"}) {
        CAPTURE(text);
        const auto c = testsupport::tuned_fd_check(parse2(text), {0.3, 0.6});
        REQUIRE(c);
        CHECK(c->discrepancy < 1e-7);
    }
}

TEST_CASE("domain errors name the offending node")
{
    const double p[] = {-1.0, 0.0};
    auto message = [&](const char* text) {
        try {
            parse2(text).value(p);
        } catch (const DomainError& e) {
            return std::string(e.what());
        }
        return std::string();
    };
    CHECK(message("log(z1)").find("position 0") != std::string::npos);
    CHECK(message("1 + sqrt(z1)").find("position 4") != std::string::npos);
    CHECK(message("1/z2").find("division by zero") != std::string::npos);
    CHECK(message("z1^0.5").find("position") != std::string::npos);
    CHECK(message("exp(1000)").find("non-finite") != std::string::npos);
    CHECK_THROWS_AS(parse2("log(z1)").jet(p), DomainError);
    CHECK_THROWS_AS(parse2("z1").value(std::vector<double>{1.0}), PreconditionError);
}

TEST_CASE("integer powers are exact for negative bases")
{
    const double p[] = {-1.5, 0.0};
    CHECK(parse2("z1^3").value(p) == -3.375);
    CHECK(parse2("z1^-2").value(p) == 1.0 / 2.25);
    const Jet2 j = parse2("z1^3").jet(p);
    CHECK(j.grad(0) == 3 * 2.25);
    CHECK(j.hess(0, 0) == 6 * -1.5);
}

TEST_CASE("render round-trips structurally")
{
    for (const char* text : {"z1^2 + 3*z2", "-z1", "-2.5", "-(2.5)", "(-2.5)^2", "-2.5^2", "sin(-z1)/cos(z2)",
             "2^3^2", "1e-3*z1 - -4", "pi*e", "0.1 + 0.2"}) {
        CAPTURE(text);
        const auto e = parse2(text);
        const auto back = parse2(e.render().c_str());
        CHECK(structurally_equal(e.root(), back.root()));
        CHECK(back.render() == e.render());
        const double p[] = {0.3, 0.7};
        CHECK(e.value(p) == back.value(p));
    }
    CHECK(parse2("(-2.5)^2").value(std::vector<double>{0, 0}) == 6.25);
    CHECK(parse2("-2.5^2").value(std::vector<double>{0, 0}) == -6.25);
}

TEST_CASE("random trees: round trip, derivatives, symmetry")
{
    std::mt19937_64 rng(31);
    int checked = 0;
    for (int i = 0; i < 300; ++i) {
        const std::size_t nv = 1 + i % 3;
        std::vector<std::string> names;
        for (std::size_t k = 0; k < nv; ++k)
            names.push_back("z" + std::to_string(k + 1));
        testsupport::TreeGenerator gen(rng, nv);
        const Expression e(gen.tree(1 + i % 6), names);
        const Expression back = Expression::parse(e.render(), names);
        REQUIRE(structurally_equal(e.root(), back.root()));

        std::vector<double> x;
        for (std::size_t k = 0; k < nv; ++k)
            x.push_back(testsupport::uniform(rng, -1, 1));
        try {
            const Jet2 j = e.jet(x);
            CHECK(back.jet(x).value() == j.value());
            for (std::size_t a = 0; a < nv; ++a)
                for (std::size_t b = 0; b < nv; ++b)
                    CHECK(j.hess(a, b) == j.hess(b, a));
            const auto c = testsupport::tuned_fd_check(e, x);
            if (std::abs(j.value()) < 1e6 && c && c->conditioning <= 1e-7) {
                CHECK(c->discrepancy <= 1e-5);
                ++checked;
            }
        } catch (const Error&) {
        }
    }
    CHECK(checked > 200);
}

TEST_CASE("jets are linear in the expression")
{
    const auto f = parse2("sin(z1)*exp(z2)");
    const auto g = parse2("z1^3 - log(2 + z2)");
    const auto combo = parse2("1.5*(sin(z1)*exp(z2)) + -0.25*(z1^3 - log(2 + z2))");
    const double p[] = {0.4, -0.3};
    const Jet2 jf = f.jet(p), jg = g.jet(p), jc = combo.jet(p);
    const double tol = 1e-14;
    CHECK(jc.value() == doctest::Approx(1.5 * jf.value() - 0.25 * jg.value()).epsilon(tol));
    for (std::size_t i = 0; i < 2; ++i) {
        CHECK(jc.grad(i) == doctest::Approx(1.5 * jf.grad(i) - 0.25 * jg.grad(i)).epsilon(tol));
        for (std::size_t k = 0; k < 2; ++k)
            CHECK(jc.hess(i, k) == doctest::Approx(1.5 * jf.hess(i, k) - 0.25 * jg.hess(i, k)).epsilon(tol));
    }
}
