#pragma once

#include "eikonal/errors.hpp"
#include "eikonal/jet.hpp"

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace eikonal::expr {

enum class BinaryOp { Add, Sub, Mul, Div, Pow };
enum class Function { Sin, Cos, Tan, Exp, Log, Sqrt, Sinh, Cosh, Atan };
enum class NamedConstant { Pi, E };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Number {
    double value;
};
struct Constant {
    NamedConstant which;
};
struct Variable {
    std::size_t index;
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};
struct Call {
    Function fn;
    NodePtr arg;
};

/// One AST node. `position` is the byte offset of the token that
/// produced it (0 for nodes built programmatically).
struct Node {
    std::variant<Number, Constant, Variable, Negate, Binary, Call> data;
    std::size_t position = 0;
    /// True when the subtree references no variable.
    bool variable_free = true;
};

NodePtr number(double value, std::size_t position = 0);
NodePtr constant(NamedConstant which, std::size_t position = 0);
NodePtr variable(std::size_t index, std::size_t position = 0);
NodePtr negate(NodePtr operand, std::size_t position = 0);
NodePtr binary(BinaryOp op, NodePtr lhs, NodePtr rhs, std::size_t position = 0);
NodePtr call(Function fn, NodePtr arg, std::size_t position = 0);

std::string_view function_name(Function fn);
char operator_symbol(BinaryOp op);

class ParseError : public Error {
public:
    enum class Kind { Syntax, UnknownIdentifier, UnknownFunction, Arity };

    ParseError(Kind kind, std::size_t position, const std::string& message);

    Kind kind() const { return kind_; }
    std::size_t position() const { return position_; }
    /// The message without the position suffix.
    const std::string& detail() const { return detail_; }

private:
    Kind kind_;
    std::size_t position_;
    std::string detail_;
};

/// An immutable analytic function of at most three named variables.
///
/// Evaluation is pure, so one Expression may be shared across threads.
class Expression {
public:
    /// Wraps a programmatically built tree. Throws std::invalid_argument if a
    /// variable index is out of range or the variable list is invalid.
    Expression(NodePtr root, std::vector<std::string> variables);

    static Expression parse(std::string_view text, std::vector<std::string> variables);

    const Node& root() const { return *root_; }
    const NodePtr& root_ptr() const { return root_; }
    const std::vector<std::string>& variables() const { return variables_; }
    std::size_t arity() const { return variables_.size(); }

    /// Value, gradient and Hessian at `point` (size == arity()).
    /// Throws DomainError naming the offending node.
    Jet2 jet(std::span<const double> point) const;
    double value(std::span<const double> point) const;

    /// Text that parses back to a structurally identical tree.
    std::string render() const;

private:
    NodePtr root_;
    std::vector<std::string> variables_;
};

inline Jet2 eval_jet(const Expression& e, std::span<const double> point) { return e.jet(point); }

bool structurally_equal(const Node& a, const Node& b);

struct FdDiscrepancy {
    double gradient = 0.0;
    double hessian = 0.0;
    double max() const { return gradient > hessian ? gradient : hessian; }
};

/// Compares the jet gradient with central differences of values and the
/// hessian with central differences of the jet gradient, step h. Each
/// entry's error is |fd - exact| / max(1, |exact|).
FdDiscrepancy fd_check(const Expression& e, std::span<const double> point, double h);

} // namespace eikonal::expr
