#include "routh/expr.hpp"

#include <array>
#include <cctype>
#include <charconv>
#include <optional>
#include <utility>

namespace routh::expr {

namespace {

constexpr int kMaxDepth = 200;

struct FunctionName {
  std::string_view name;
  Function fn;
};

constexpr std::array<FunctionName, 7> kFunctions{{{"sin", Function::Sin},
                                                   {"cos", Function::Cos},
                                                   {"tan", Function::Tan},
                                                   {"exp", Function::Exp},
                                                   {"log", Function::Log},
                                                   {"sqrt", Function::Sqrt},
                                                   {"abs", Function::Abs}}};

std::optional<Function> lookup_function(std::string_view name) {
  for (const auto& f : kFunctions)
    if (f.name == name) return f.fn;
  return std::nullopt;
}

std::string_view function_name(Function fn) {
  for (const auto& f : kFunctions)
    if (f.fn == fn) return f.name;
  return "?";
}

// Binding powers: (left, right). ^ binds tighter than unary minus.
constexpr int kUnaryPower = 30;

std::optional<std::pair<int, int>> infix_power(char op) {
  switch (op) {
    case '+':
    case '-':
      return std::pair{10, 11};
    case '*':
    case '/':
      return std::pair{20, 21};
    case '^':
      return std::pair{41, 40};
    default:
      return std::nullopt;
  }
}

BinaryOp to_binary(char op) {
  switch (op) {
    case '+':
      return BinaryOp::Add;
    case '-':
      return BinaryOp::Sub;
    case '*':
      return BinaryOp::Mul;
    case '/':
      return BinaryOp::Div;
    default:
      return BinaryOp::Pow;
  }
}

class Parser {
 public:
  Parser(std::string_view src, const NameSet& variables, const NameSet& parameters)
      : src_(src), variables_(variables), parameters_(parameters) {}

  Expr run() {
    skip_ws();
    const int root = parse_expr(0, 0);
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_);
    return Expr(std::move(nodes_), root, std::string(src_));
  }

 private:
  int parse_expr(int min_power, int depth) {
    if (depth > kMaxDepth) throw ParseError("expression nested too deeply", pos_);
    int lhs = parse_prefix(depth);
    for (;;) {
      skip_ws();
      if (pos_ >= src_.size()) break;
      const char op = src_[pos_];
      const auto power = infix_power(op);
      if (!power || power->first < min_power) break;
      const std::size_t at = pos_;
      ++pos_;
      const int rhs = parse_expr(power->second, depth + 1);
      Node n;
      n.kind = NodeKind::Binary;
      n.op = to_binary(op);
      n.lhs = lhs;
      n.rhs = rhs;
      n.offset = at;
      lhs = push(std::move(n));
    }
    return lhs;
  }

  int parse_prefix(int depth) {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("expected expression", pos_);
    const char c = src_[pos_];
    const std::size_t at = pos_;
    if (c == '-') {
      ++pos_;
      Node n;
      n.kind = NodeKind::Negate;
      n.lhs = parse_expr(kUnaryPower, depth + 1);
      n.offset = at;
      return push(std::move(n));
    }
    if (c == '(') {
      ++pos_;
      const int inner = parse_expr(0, depth + 1);
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier(depth);
    throw ParseError("unexpected '" + std::string(1, c) + "'", pos_);
  }

  int parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      std::size_t count = 0;
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) {
        ++pos_;
        ++count;
      }
      return count;
    };
    std::size_t mantissa = digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      mantissa += digits();
    }
    if (mantissa == 0) throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      ++pos_;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (digits() == 0) throw ParseError("malformed exponent", start);
    }
    double value = 0.0;
    const auto* first = src_.data() + start;
    const auto* last = src_.data() + pos_;
    const auto res = std::from_chars(first, last, value);
    if (res.ec != std::errc() || res.ptr != last) throw ParseError("number out of range", start);
    Node n;
    n.kind = NodeKind::Number;
    n.number = value;
    n.offset = start;
    return push(std::move(n));
  }

  int parse_identifier(int depth) {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    if (auto fn = lookup_function(name)) {
      skip_ws();
      if (pos_ >= src_.size() || src_[pos_] != '(')
        throw ParseError("expected '(' after function '" + std::string(name) + "'", pos_);
      ++pos_;
      Node n;
      n.kind = NodeKind::Call;
      n.fn = *fn;
      n.lhs = parse_expr(0, depth + 1);
      n.offset = start;
      expect(')');
      return push(std::move(n));
    }
    Node n;
    n.name = std::string(name);
    n.offset = start;
    if (variables_.contains(name)) {
      n.kind = NodeKind::Variable;
    } else if (parameters_.contains(name)) {
      n.kind = NodeKind::Parameter;
    } else {
      throw ParseError("unknown identifier '" + std::string(name) + "'", start);
    }
    return push(std::move(n));
  }

  void expect(char c) {
    skip_ws();
    if (pos_ >= src_.size() || src_[pos_] != c) throw ParseError("expected '" + std::string(1, c) + "'", pos_);
    ++pos_;
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  int push(Node n) {
    nodes_.push_back(std::move(n));
    return static_cast<int>(nodes_.size()) - 1;
  }

  std::string_view src_;
  const NameSet& variables_;
  const NameSet& parameters_;
  std::size_t pos_ = 0;
  std::vector<Node> nodes_;
};

std::string format_number(double v) {
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

void print_node(std::span<const Node> nodes, int idx, std::string& out) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  switch (n.kind) {
    case NodeKind::Number:
      out += format_number(n.number);
      return;
    case NodeKind::Variable:
    case NodeKind::Parameter:
      out += n.name;
      return;
    case NodeKind::Negate:
      out += "(-";
      print_node(nodes, n.lhs, out);
      out += ')';
      return;
    case NodeKind::Call:
      out += function_name(n.fn);
      out += '(';
      print_node(nodes, n.lhs, out);
      out += ')';
      return;
    case NodeKind::Binary: {
      static constexpr std::array<char, 5> kOps{'+', '-', '*', '/', '^'};
      out += '(';
      print_node(nodes, n.lhs, out);
      out += ' ';
      out += kOps[static_cast<std::size_t>(n.op)];
      out += ' ';
      print_node(nodes, n.rhs, out);
      out += ')';
      return;
    }
  }
}

template <class T>
T apply_function(Function fn, T x) {
  switch (fn) {
    case Function::Sin:
      return ad::sin(x);
    case Function::Cos:
      return ad::cos(x);
    case Function::Tan:
      return ad::tan(x);
    case Function::Exp:
      return ad::exp(x);
    case Function::Log:
      return ad::log(x);
    case Function::Sqrt:
      return ad::sqrt(x);
    case Function::Abs:
      return ad::abs(x);
  }
  return x;
}

template <class T>
T apply_binary(BinaryOp op, T a, T b) {
  switch (op) {
    case BinaryOp::Add:
      return a + b;
    case BinaryOp::Sub:
      return a - b;
    case BinaryOp::Mul:
      return a * b;
    case BinaryOp::Div:
      return ad::divide(a, b);
    case BinaryOp::Pow:
      return ad::pow(a, b);
  }
  return a;
}

// Recursive evaluator; `leaf(idx)` resolves Variable/Parameter nodes.
template <class T, class Leaf>
T eval_node(std::span<const Node> nodes, int idx, const Leaf& leaf) {
  const Node& n = nodes[static_cast<std::size_t>(idx)];
  T result{};
  try {
    switch (n.kind) {
      case NodeKind::Number:
        return T(n.number);
      case NodeKind::Variable:
      case NodeKind::Parameter:
        return leaf(idx);
      case NodeKind::Negate:
        return -eval_node<T>(nodes, n.lhs, leaf);
      case NodeKind::Call:
        result = apply_function(n.fn, eval_node<T>(nodes, n.lhs, leaf));
        break;
      case NodeKind::Binary:
        result = apply_binary(n.op, eval_node<T>(nodes, n.lhs, leaf), eval_node<T>(nodes, n.rhs, leaf));
        break;
    }
  } catch (const DomainError& e) {
    throw EvaluationError(e.what(), n.offset);
  }
  if (!ad::all_finite(result)) throw EvaluationError("non-finite result", n.offset);
  return result;
}

class BoundExpr final : public ScalarField::Impl {
 public:
  BoundExpr(const Expr& e, std::span<const std::string> slots, const std::map<std::string, double>& parameters)
      : expr_(e), slot_(e.nodes().size(), -1), constant_(e.nodes().size(), 0.0) {
    const auto nodes = e.nodes();
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const Node& n = nodes[i];
      if (n.kind != NodeKind::Variable && n.kind != NodeKind::Parameter) continue;
      bool found = false;
      for (std::size_t s = 0; s < slots.size(); ++s) {
        if (slots[s] == n.name) {
          slot_[i] = static_cast<int>(s);
          found = true;
          break;
        }
      }
      if (found) continue;
      if (auto it = parameters.find(n.name); it != parameters.end()) {
        constant_[i] = it->second;
        continue;
      }
      throw InputError("unbound name '" + n.name + "' in expression '" + e.source() + "'");
    }
  }

  double eval(std::span<const double> x) const override { return run(x); }
  ad::Dual eval(std::span<const ad::Dual> x) const override { return run(x); }
  ad::HyperDual eval(std::span<const ad::HyperDual> x) const override { return run(x); }

 private:
  template <class T>
  T run(std::span<const T> x) const {
    auto leaf = [&](int idx) -> T {
      const int s = slot_[static_cast<std::size_t>(idx)];
      return s >= 0 ? x[static_cast<std::size_t>(s)] : T(constant_[static_cast<std::size_t>(idx)]);
    };
    return eval_node<T>(expr_.nodes(), expr_.root(), leaf);
  }

  Expr expr_;
  std::vector<int> slot_;
  std::vector<double> constant_;
};

}  // namespace

Expr::Expr(std::vector<Node> nodes, int root, std::string source)
    : nodes_(std::make_shared<const std::vector<Node>>(std::move(nodes))),
      source_(std::make_shared<const std::string>(std::move(source))),
      root_(root) {}

NameSet Expr::free_names() const {
  NameSet names;
  for (const Node& n : nodes())
    if (n.kind == NodeKind::Variable || n.kind == NodeKind::Parameter) names.insert(n.name);
  return names;
}

Expr parse(std::string_view src, const NameSet& variables, const NameSet& parameters) {
  return Parser(src, variables, parameters).run();
}

std::string print(const Expr& e) {
  std::string out;
  print_node(e.nodes(), e.root(), out);
  return out;
}

template <class T>
T eval(const Expr& e, const EvalEnv<T>& env) {
  const auto nodes = e.nodes();
  auto leaf = [&](int idx) -> T {
    const Node& n = nodes[static_cast<std::size_t>(idx)];
    const auto it = env.find(n.name);
    if (it == env.end()) throw InputError("unbound name '" + n.name + "'");
    return it->second;
  };
  return eval_node<T>(nodes, e.root(), leaf);
}

template double eval<double>(const Expr&, const EvalEnv<double>&);
template ad::Dual eval<ad::Dual>(const Expr&, const EvalEnv<ad::Dual>&);
template ad::HyperDual eval<ad::HyperDual>(const Expr&, const EvalEnv<ad::HyperDual>&);

ScalarField bind(const Expr& e, std::span<const std::string> slots, const std::map<std::string, double>& parameters) {
  return ScalarField(slots.size(), std::make_shared<const BoundExpr>(e, slots, parameters));
}

}  // namespace routh::expr
