#pragma once

// Small arithmetic expression language for the scalar fields given in
// configuration files.
//
//   variables  x y t, constants pi e, chiN = indicator of cover set N
//   operators  + - * / ^ (right associative), unary minus, parentheses
//   functions  sin cos tan exp log sqrt abs tanh cosh sinh step(s)
//              pow(a,b) min(a,b) max(a,b)

#include <stdexcept>
#include <string>
#include <vector>

namespace cdr {

class ExpressionError : public std::invalid_argument {
public:
    ExpressionError(const std::string& message, std::size_t position)
        : std::invalid_argument(message), position_(position) {}
    std::size_t position() const { return position_; }

private:
    std::size_t position_;
};

struct ExpressionVariables {
    double x = 0.0;
    double y = 0.0;
    double t = 0.0;
    /// chi[i] is 1 inside cover set i, else 0.
    std::vector<double> chi;
};

class Expression {
public:
    Expression() = default;
    /// Parses `text`; chiN is accepted for N < num_sets. Throws
    /// ExpressionError with the offending character offset.
    Expression(const std::string& text, int num_sets);

    double operator()(const ExpressionVariables& vars) const;
    const std::string& text() const { return text_; }
    bool uses_time() const { return uses_time_; }
    bool uses_indicators() const { return uses_indicators_; }

    enum class Op : unsigned char {
        Number, X, Y, T, Chi,
        Add, Sub, Mul, Div, Pow, Neg,
        Sin, Cos, Tan, Exp, Log, Sqrt, Abs, Tanh, Cosh, Sinh, Step,
        Pow2, Min, Max,
    };
    struct Instr {
        Op op;
        double value = 0.0;
        int index = 0;
    };

private:
    std::string text_;
    std::vector<Instr> code_;  // postfix program
    bool uses_time_ = false;
    bool uses_indicators_ = false;
};

}  // namespace cdr
