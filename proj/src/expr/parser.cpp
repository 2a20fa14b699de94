#include "eikonal/expr.hpp"

#include <cctype>
#include <charconv>
#include <map>
#include <optional>

namespace eikonal::expr {

namespace {

// Grammar (lowest to highest precedence):
//   sum     := product (('+' | '-') product)*
//   product := unary (('*' | '/') unary)*
//   unary   := ('-' | '+') unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | constant | variable | name '(' args ')' | '(' sum ')'
class Parser {
public:
    Parser(std::string_view text, const std::vector<std::string>& vars) : text_(text), vars_(vars) {}

    NodePtr parse()
    {
        skip_ws();
        if (pos_ == text_.size())
            throw ParseError(ParseError::Kind::Syntax, pos_, "empty expression");
        NodePtr root = sum();
        skip_ws();
        if (pos_ != text_.size())
            throw ParseError(ParseError::Kind::Syntax, pos_,
                std::string("unexpected '") + text_[pos_] + "'");
        return root;
    }

private:
    void skip_ws()
    {
        while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_])))
            ++pos_;
    }

    bool accept(char c)
    {
        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    [[noreturn]] void unexpected()
    {
        if (pos_ >= text_.size())
            throw ParseError(ParseError::Kind::Syntax, pos_, "unexpected end of input");
        throw ParseError(ParseError::Kind::Syntax, pos_, std::string("unexpected '") + text_[pos_] + "'");
    }

    NodePtr sum()
    {
        NodePtr lhs = product();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('+'))
                lhs = binary(BinaryOp::Add, lhs, product(), at);
            else if (accept('-'))
                lhs = binary(BinaryOp::Sub, lhs, product(), at);
            else
                return lhs;
        }
    }

    NodePtr product()
    {
        NodePtr lhs = unary();
        for (;;) {
            skip_ws();
            const std::size_t at = pos_;
            if (accept('*'))
                lhs = binary(BinaryOp::Mul, lhs, unary(), at);
            else if (accept('/'))
                lhs = binary(BinaryOp::Div, lhs, unary(), at);
            else
                return lhs;
        }
    }

    NodePtr unary()
    {
        skip_ws();
        const std::size_t at = pos_;
        if (accept('-')) {
            skip_ws();
            const bool literal_next = pos_ < text_.size()
                && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.');
            NodePtr operand = unary();
            // "-2.5" is a negative literal; "-(2.5)" stays a negation
            if (const auto* lit = std::get_if<Number>(&operand->data); lit && literal_next)
                return number(-lit->value, at);
            return negate(std::move(operand), at);
        }
        if (accept('+'))
            return unary();
        return power();
    }

    NodePtr power()
    {
        NodePtr base = primary();
        skip_ws();
        const std::size_t at = pos_;
        if (accept('^'))
            return binary(BinaryOp::Pow, base, unary(), at);
        return base;
    }

    NodePtr primary()
    {
        skip_ws();
        if (pos_ >= text_.size())
            unexpected();
        const char c = text_[pos_];
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.')
            return number_literal();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_')
            return name();
        if (c == '(') {
            ++pos_;
            NodePtr inner = sum();
            if (!accept(')'))
                unexpected();
            return inner;
        }
        unexpected();
    }

    NodePtr number_literal()
    {
        const std::size_t start = pos_;
        auto digits = [&] {
            std::size_t n = 0;
            while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
                ++pos_;
                ++n;
            }
            return n;
        };
        std::size_t mantissa = digits();
        if (pos_ < text_.size() && text_[pos_] == '.') {
            ++pos_;
            mantissa += digits();
        }
        if (mantissa == 0)
            throw ParseError(ParseError::Kind::Syntax, start, "malformed number");
        if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
            // Only an exponent if digits follow; otherwise `e` is left for the caller
            // (so "2e" is a syntax error rather than a silent 2*e).
            std::size_t look = pos_ + 1;
            if (look < text_.size() && (text_[look] == '+' || text_[look] == '-'))
                ++look;
            if (look < text_.size() && std::isdigit(static_cast<unsigned char>(text_[look]))) {
                pos_ = look;
                digits();
            }
        }
        double value = 0.0;
        auto res = std::from_chars(text_.data() + start, text_.data() + pos_, value);
        if (res.ec != std::errc() || res.ptr != text_.data() + pos_)
            throw ParseError(ParseError::Kind::Syntax, start, "malformed number");
        return number(value, start);
    }

    NodePtr name()
    {
        const std::size_t start = pos_;
        while (pos_ < text_.size()
            && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
            ++pos_;
        const std::string_view id = text_.substr(start, pos_ - start);

        skip_ws();
        if (pos_ < text_.size() && text_[pos_] == '(') {
            static const std::map<std::string_view, Function> functions = {
                {"sin", Function::Sin}, {"cos", Function::Cos}, {"tan", Function::Tan},
                {"exp", Function::Exp}, {"log", Function::Log}, {"sqrt", Function::Sqrt},
                {"sinh", Function::Sinh}, {"cosh", Function::Cosh}, {"atan", Function::Atan}};
            auto it = functions.find(id);
            if (it == functions.end())
                throw ParseError(ParseError::Kind::UnknownFunction, start,
                    "unknown function '" + std::string(id) + "'");
            ++pos_;
            std::vector<NodePtr> args;
            skip_ws();
            if (!accept(')')) {
                args.push_back(sum());
                while (accept(','))
                    args.push_back(sum());
                if (!accept(')'))
                    unexpected();
            }
            if (args.size() != 1)
                throw ParseError(ParseError::Kind::Arity, start,
                    "function '" + std::string(id) + "' takes 1 argument, got "
                        + std::to_string(args.size()));
            return call(it->second, args.front(), start);
        }

        if (id == "pi")
            return constant(NamedConstant::Pi, start);
        if (id == "e")
            return constant(NamedConstant::E, start);
        for (std::size_t i = 0; i < vars_.size(); ++i)
            if (vars_[i] == id)
                return variable(i, start);
        throw ParseError(ParseError::Kind::UnknownIdentifier, start,
            "unknown identifier '" + std::string(id) + "'");
    }

    std::string_view text_;
    const std::vector<std::string>& vars_;
    std::size_t pos_ = 0;
};

} // namespace

Expression Expression::parse(std::string_view text, std::vector<std::string> variables)
{
    // Validate the variable list before parsing so bad names surface first.
    Expression probe(number(0.0), variables);
    Parser p(text, probe.variables());
    NodePtr root = p.parse();
    return Expression(std::move(root), std::move(variables));
}

} // namespace eikonal::expr
