#include "cdr/expression.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <numbers>

namespace cdr {

namespace {

using Op = Expression::Op;
using Instr = Expression::Instr;

struct Function {
    Op op;
    int arity;
};

const std::map<std::string, Function>& functions() {
    static const std::map<std::string, Function> table{
        {"sin", {Op::Sin, 1}},   {"cos", {Op::Cos, 1}},   {"tan", {Op::Tan, 1}},   {"exp", {Op::Exp, 1}},
        {"log", {Op::Log, 1}},   {"sqrt", {Op::Sqrt, 1}}, {"abs", {Op::Abs, 1}},   {"tanh", {Op::Tanh, 1}},
        {"cosh", {Op::Cosh, 1}}, {"sinh", {Op::Sinh, 1}}, {"step", {Op::Step, 1}}, {"pow", {Op::Pow2, 2}},
        {"min", {Op::Min, 2}},   {"max", {Op::Max, 2}},
    };
    return table;
}

class Parser {
public:
    Parser(const std::string& text, int num_sets, std::vector<Instr>& code, bool& uses_time, bool& uses_chi)
        : s_(text), num_sets_(num_sets), code_(code), uses_time_(uses_time), uses_chi_(uses_chi) {}

    void parse() {
        skip();
        if (pos_ >= s_.size()) {
            fail("empty expression");
        }
        expr();
        skip();
        if (pos_ < s_.size()) {
            fail(std::string("unexpected '") + s_[pos_] + "'");
        }
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw ExpressionError("expression error at offset " + std::to_string(pos_) + ": " + what, pos_);
    }

    void skip() {
        while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) {
            ++pos_;
        }
    }

    bool accept(char c) {
        skip();
        if (pos_ < s_.size() && s_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    void expect(char c) {
        if (!accept(c)) {
            fail(std::string("expected '") + c + "'");
        }
    }

    void emit(Op op, double value = 0.0, int index = 0) { code_.push_back(Instr{op, value, index}); }

    void expr() {
        term();
        while (true) {
            if (accept('+')) {
                term();
                emit(Op::Add);
            } else if (accept('-')) {
                term();
                emit(Op::Sub);
            } else {
                return;
            }
        }
    }

    void term() {
        unary();
        while (true) {
            if (accept('*')) {
                unary();
                emit(Op::Mul);
            } else if (accept('/')) {
                unary();
                emit(Op::Div);
            } else {
                return;
            }
        }
    }

    void unary() {
        if (accept('-')) {
            unary();
            emit(Op::Neg);
        } else if (accept('+')) {
            unary();
        } else {
            power();
        }
    }

    void power() {
        primary();
        if (accept('^')) {
            unary();  // right associative, 2^-1 allowed
            emit(Op::Pow);
        }
    }

    void primary() {
        skip();
        if (pos_ >= s_.size()) {
            fail("unexpected end of expression");
        }
        const char c = s_[pos_];
        if (c == '(') {
            ++pos_;
            expr();
            expect(')');
            return;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
            const char* begin = s_.c_str() + pos_;
            char* end = nullptr;
            const double v = std::strtod(begin, &end);
            if (end == begin) {
                fail("malformed number");
            }
            pos_ += static_cast<std::size_t>(end - begin);
            emit(Op::Number, v);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            const std::size_t start = pos_;
            while (pos_ < s_.size() && (std::isalnum(static_cast<unsigned char>(s_[pos_])) || s_[pos_] == '_')) {
                ++pos_;
            }
            identifier(s_.substr(start, pos_ - start), start);
            return;
        }
        fail(std::string("unexpected '") + c + "'");
    }

    void identifier(const std::string& name, std::size_t start) {
        if (name == "x") {
            emit(Op::X);
        } else if (name == "y") {
            emit(Op::Y);
        } else if (name == "t") {
            emit(Op::T);
            uses_time_ = true;
        } else if (name == "pi") {
            emit(Op::Number, std::numbers::pi);
        } else if (name == "e") {
            emit(Op::Number, std::numbers::e);
        } else if (name.size() > 3 && name.compare(0, 3, "chi") == 0 &&
                   name.find_first_not_of("0123456789", 3) == std::string::npos) {
            const int idx = std::stoi(name.substr(3));
            if (idx >= num_sets_) {
                pos_ = start;
                fail("indicator '" + name + "' refers to a cover set that does not exist");
            }
            emit(Op::Chi, 0.0, idx);
            uses_chi_ = true;
        } else {
            const auto it = functions().find(name);
            if (it == functions().end()) {
                pos_ = start;
                fail("unknown identifier '" + name + "'");
            }
            expect('(');
            expr();
            for (int a = 1; a < it->second.arity; ++a) {
                expect(',');
                expr();
            }
            expect(')');
            emit(it->second.op);
        }
    }

    const std::string& s_;
    int num_sets_;
    std::vector<Instr>& code_;
    bool& uses_time_;
    bool& uses_chi_;
    std::size_t pos_ = 0;
};

}  // namespace

Expression::Expression(const std::string& text, int num_sets) : text_(text) {
    Parser(text_, num_sets, code_, uses_time_, uses_indicators_).parse();
}

double Expression::operator()(const ExpressionVariables& v) const {
    std::vector<double> st;
    st.reserve(16);
    auto pop = [&st] {
        const double a = st.back();
        st.pop_back();
        return a;
    };
    for (const Instr& in : code_) {
        switch (in.op) {
            case Op::Number: st.push_back(in.value); break;
            case Op::X: st.push_back(v.x); break;
            case Op::Y: st.push_back(v.y); break;
            case Op::T: st.push_back(v.t); break;
            case Op::Chi:
                st.push_back(static_cast<std::size_t>(in.index) < v.chi.size() ? v.chi[static_cast<std::size_t>(in.index)] : 0.0);
                break;
            case Op::Add: { const double b = pop(); st.back() += b; break; }
            case Op::Sub: { const double b = pop(); st.back() -= b; break; }
            case Op::Mul: { const double b = pop(); st.back() *= b; break; }
            case Op::Div: { const double b = pop(); st.back() /= b; break; }
            case Op::Pow:
            case Op::Pow2: { const double b = pop(); st.back() = std::pow(st.back(), b); break; }
            case Op::Min: { const double b = pop(); st.back() = std::min(st.back(), b); break; }
            case Op::Max: { const double b = pop(); st.back() = std::max(st.back(), b); break; }
            case Op::Neg: st.back() = -st.back(); break;
            case Op::Sin: st.back() = std::sin(st.back()); break;
            case Op::Cos: st.back() = std::cos(st.back()); break;
            case Op::Tan: st.back() = std::tan(st.back()); break;
            case Op::Exp: st.back() = std::exp(st.back()); break;
            case Op::Log: st.back() = std::log(st.back()); break;
            case Op::Sqrt: st.back() = std::sqrt(st.back()); break;
            case Op::Abs: st.back() = std::abs(st.back()); break;
            case Op::Tanh: st.back() = std::tanh(st.back()); break;
            case Op::Cosh: st.back() = std::cosh(st.back()); break;
            case Op::Sinh: st.back() = std::sinh(st.back()); break;
            case Op::Step: st.back() = st.back() >= 0.0 ? 1.0 : 0.0; break;
        }
    }
    return st.empty() ? 0.0 : st.back();
}

}  // namespace cdr
