#ifndef GEOCONNECT_FIELDLANG_HPP
#define GEOCONNECT_FIELDLANG_HPP

// Small expression language for scalar / vector coordinate fields.
//
// Grammar (see README for the user-facing description):
//   expr      := term (('+'|'-') term)*
//   term      := unary (('*'|'/') unary)*
//   unary     := '-' unary | power
//   power     := atom ('^' unary)?
//   atom      := number | 'pi' | 'u' | 'x<k>' | fn '(' expr ')'
//              | 'piecewise' '(' expr cmp expr ',' expr ',' expr ')'
//              | 'vec' '(' expr (',' expr)* ')'   (top level only)
//              | '(' expr ')'
//   fn        := sin | cos | exp | sqrt | abs
//   cmp       := '<' | '<=' | '>' | '>=' | '=='
//
// Derivatives are exact: evaluation is templated over a forward-mode dual
// number type, so first and second partials come from the same code path
// as plain evaluation.

#include <cmath>
#include <charconv>
#include <cstddef>
#include <cstdio>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "geoconnect/linalg.hpp"

namespace geoconnect {

class FieldError : public Error {
public:
  FieldError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

namespace fieldlang {

template <class T>
struct Dual {
  T v{};  // value
  T d{};  // derivative along the seeded direction

  Dual() = default;
  Dual(T value) : v(value) {}
  Dual(T value, T deriv) : v(value), d(deriv) {}
};

template <class T> Dual<T> operator+(const Dual<T>& a, const Dual<T>& b) { return {a.v + b.v, a.d + b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a, const Dual<T>& b) { return {a.v - b.v, a.d - b.d}; }
template <class T> Dual<T> operator-(const Dual<T>& a) { return {-a.v, -a.d}; }
template <class T> Dual<T> operator*(const Dual<T>& a, const Dual<T>& b) {
  return {a.v * b.v, a.d * b.v + a.v * b.d};
}

// Plain-double leaves of the templated evaluator.
inline double value_part(double x) { return x; }
template <class T> double value_part(const Dual<T>& x) { return value_part(x.v); }

inline void collect_components(double x, std::vector<double>& out) { out.push_back(x); }
template <class T> void collect_components(const Dual<T>& x, std::vector<double>& out) {
  collect_components(x.v, out);
  collect_components(x.d, out);
}

template <class T> Dual<T> operator/(const Dual<T>& a, const Dual<T>& b) {
  const T inv = T(1.0) / b.v;
  const T q = a.v * inv;
  return {q, (a.d - q * b.d) * inv};
}

template <class T> Dual<T> sin(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {sin(a.v), a.d * cos(a.v)};
}
template <class T> Dual<T> cos(const Dual<T>& a) {
  using std::cos;
  using std::sin;
  return {cos(a.v), -a.d * sin(a.v)};
}
template <class T> Dual<T> exp(const Dual<T>& a) {
  using std::exp;
  const T e = exp(a.v);
  return {e, a.d * e};
}
template <class T> Dual<T> log(const Dual<T>& a) {
  using std::log;
  return {log(a.v), a.d / a.v};
}
template <class T> Dual<T> sqrt(const Dual<T>& a) {
  using std::sqrt;
  const T r = sqrt(a.v);
  return {r, a.d / (T(2.0) * r)};
}

enum class NodeKind {
  number,
  coord,     // x1..xd -> index 0..d-1
  uvar,
  neg,
  add,
  sub,
  mul,
  div,
  pow,
  call,      // sin cos exp sqrt abs
  piecewise, // kids: lhs, rhs, a, b  (+ cmp op)
  vector     // kids: scalar components; only allowed at the root
};

enum class Fn { sin, cos, exp, sqrt, abs };
enum class Cmp { lt, le, gt, ge, eq };

struct Node {
  NodeKind kind = NodeKind::number;
  double number = 0.0;
  int coord = -1;
  Fn fn = Fn::sin;
  Cmp cmp = Cmp::lt;
  std::optional<long long> int_exponent;  // fast/valid path for a^k with integer k
  std::size_t offset = 0;
  std::vector<Node> kids;
};

struct Seam {
  int axis;      // coordinate index, or -1 for the u variable
  double value;  // seam location along that axis
};

namespace detail {

inline bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_';
}

class Parser {
public:
  Parser(std::string_view src, int dimension) : src_(src), dim_(dimension) {}

  Node parse_toplevel(int* arity, bool* uses_u) {
    skip_ws();
    Node root;
    if (peek_ident() == "vec") {
      const std::size_t off = pos_;
      eat_ident();
      expect('(');
      root.kind = NodeKind::vector;
      root.offset = off;
      root.kids.push_back(parse_expr());
      while (try_eat(',')) root.kids.push_back(parse_expr());
      expect(')');
    } else {
      root = parse_expr();
    }
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected trailing input", pos_);
    *arity = root.kind == NodeKind::vector ? static_cast<int>(root.kids.size()) : 1;
    *uses_u = uses_u_;
    if (root.kind == NodeKind::vector && *arity != dim_ && dim_ != 0)
      fail("vector arity " + std::to_string(*arity) + " does not match dimension " +
               std::to_string(dim_),
           root.offset);
    return root;
  }

private:
  std::string_view src_;
  int dim_;
  std::size_t pos_ = 0;
  bool uses_u_ = false;

  [[noreturn]] void fail(const std::string& msg, std::size_t off) const {
    throw FieldError("syntax error: " + msg, off);
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' ||
                                  src_[pos_] == '\r'))
      ++pos_;
  }

  char peek() {
    skip_ws();
    return pos_ < src_.size() ? src_[pos_] : '\0';
  }

  bool try_eat(char c) {
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!try_eat(c)) fail(std::string("expected '") + c + "'", pos_);
  }

  std::string_view peek_ident() {
    skip_ws();
    std::size_t end = pos_;
    while (end < src_.size() && is_ident_char(src_[end])) ++end;
    if (end == pos_ || (src_[pos_] >= '0' && src_[pos_] <= '9')) return {};
    return src_.substr(pos_, end - pos_);
  }

  void eat_ident() {
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
  }

  Node parse_expr() {
    Node lhs = parse_term();
    while (true) {
      skip_ws();
      const std::size_t off = pos_;
      if (try_eat('+')) {
        Node n;
        n.kind = NodeKind::add;
        n.offset = off;
        n.kids.push_back(std::move(lhs));
        n.kids.push_back(parse_term());
        lhs = std::move(n);
      } else if (peek() == '-' ) {
        ++pos_;
        Node n;
        n.kind = NodeKind::sub;
        n.offset = off;
        n.kids.push_back(std::move(lhs));
        n.kids.push_back(parse_term());
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  Node parse_term() {
    Node lhs = parse_unary();
    while (true) {
      skip_ws();
      const std::size_t off = pos_;
      if (try_eat('*')) {
        Node n;
        n.kind = NodeKind::mul;
        n.offset = off;
        n.kids.push_back(std::move(lhs));
        n.kids.push_back(parse_unary());
        lhs = std::move(n);
      } else if (try_eat('/')) {
        Node n;
        n.kind = NodeKind::div;
        n.offset = off;
        n.kids.push_back(std::move(lhs));
        n.kids.push_back(parse_unary());
        lhs = std::move(n);
      } else {
        return lhs;
      }
    }
  }

  Node parse_unary() {
    skip_ws();
    const std::size_t off = pos_;
    if (try_eat('-')) {
      Node n;
      n.kind = NodeKind::neg;
      n.offset = off;
      n.kids.push_back(parse_unary());
      return n;
    }
    return parse_power();
  }

  Node parse_power() {
    Node base = parse_atom();
    skip_ws();
    const std::size_t off = pos_;
    if (try_eat('^')) {
      Node n;
      n.kind = NodeKind::pow;
      n.offset = off;
      n.kids.push_back(std::move(base));
      n.kids.push_back(parse_unary());
      const Node& e = n.kids[1];
      if (e.kind == NodeKind::number && e.number == std::floor(e.number) &&
          std::fabs(e.number) < 1e9) {
        n.int_exponent = static_cast<long long>(e.number);
      } else if (e.kind == NodeKind::neg && e.kids[0].kind == NodeKind::number &&
                 e.kids[0].number == std::floor(e.kids[0].number) &&
                 std::fabs(e.kids[0].number) < 1e9) {
        n.int_exponent = -static_cast<long long>(e.kids[0].number);
      }
      return n;
    }
    return base;
  }

  Node parse_number() {
    skip_ws();
    const std::size_t start = pos_;
    double value = 0.0;
    const char* first = src_.data() + pos_;
    const char* last = src_.data() + src_.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc()) fail("invalid number literal", start);
    pos_ += static_cast<std::size_t>(ptr - first);
    Node n;
    n.kind = NodeKind::number;
    n.number = value;
    n.offset = start;
    return n;
  }

  Cmp parse_cmp() {
    skip_ws();
    const std::size_t off = pos_;
    if (try_eat('<')) return try_eat('=') ? Cmp::le : Cmp::lt;
    if (try_eat('>')) return try_eat('=') ? Cmp::ge : Cmp::gt;
    if (try_eat('=')) {
      expect('=');
      return Cmp::eq;
    }
    fail("expected comparison operator", off);
  }

  Node parse_atom() {
    skip_ws();
    const std::size_t off = pos_;
    if (pos_ >= src_.size()) fail("unexpected end of input", off);
    const char c = src_[pos_];
    if ((c >= '0' && c <= '9') || c == '.') return parse_number();
    if (c == '(') {
      ++pos_;
      Node inner = parse_expr();
      expect(')');
      return inner;
    }
    const std::string_view id = peek_ident();
    if (id.empty()) fail("unexpected character", off);
    eat_ident();
    if (id == "pi") {
      Node n;
      n.kind = NodeKind::number;
      n.number = M_PI;
      n.offset = off;
      return n;
    }
    if (id == "u") {
      uses_u_ = true;
      Node n;
      n.kind = NodeKind::uvar;
      n.offset = off;
      return n;
    }
    if (id.size() >= 2 && id[0] == 'x') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(id.data() + 1, id.data() + id.size(), idx);
      if (ec == std::errc() && ptr == id.data() + id.size()) {
        if (idx < 1 || (dim_ > 0 && idx > dim_))
          throw FieldError("unknown identifier '" + std::string(id) + "': coordinate index out of range for dimension " +
                               std::to_string(dim_),
                           off);
        Node n;
        n.kind = NodeKind::coord;
        n.coord = idx - 1;
        n.offset = off;
        return n;
      }
    }
    if (id == "piecewise") {
      expect('(');
      Node n;
      n.kind = NodeKind::piecewise;
      n.offset = off;
      n.kids.push_back(parse_expr());
      n.cmp = parse_cmp();
      n.kids.push_back(parse_expr());
      expect(',');
      n.kids.push_back(parse_expr());
      expect(',');
      n.kids.push_back(parse_expr());
      expect(')');
      return n;
    }
    if (id == "vec") fail("vec(...) is only allowed as the outermost expression", off);
    Fn fn;
    if (id == "sin") fn = Fn::sin;
    else if (id == "cos") fn = Fn::cos;
    else if (id == "exp") fn = Fn::exp;
    else if (id == "sqrt") fn = Fn::sqrt;
    else if (id == "abs") fn = Fn::abs;
    else throw FieldError("unknown identifier '" + std::string(id) + "'", off);
    expect('(');
    Node n;
    n.kind = NodeKind::call;
    n.fn = fn;
    n.offset = off;
    n.kids.push_back(parse_expr());
    expect(')');
    return n;
  }
};

template <class T>
T pow_integer(const T& base, long long k, std::size_t off) {
  if (k == 0) return T(1.0);
  long long n = k < 0 ? -k : k;
  T acc(1.0);
  T b = base;
  while (n > 0) {
    if (n & 1) acc = acc * b;
    b = b * b;
    n >>= 1;
  }
  if (k < 0) {
    if (value_part(acc) == 0.0) throw FieldError("division by zero in negative power", off);
    return T(1.0) / acc;
  }
  return acc;
}

template <class T>
bool components_match(const T& a, const T& b, double tol) {
  std::vector<double> ca, cb;
  collect_components(a, ca);
  collect_components(b, cb);
  for (std::size_t i = 0; i < ca.size(); ++i)
    if (std::fabs(ca[i] - cb[i]) > tol * (1.0 + std::fabs(ca[i]))) return false;
  return true;
}

template <class T> constexpr bool carries_derivative = false;
template <class T> constexpr bool carries_derivative<Dual<T>> = true;

// vars holds x1..xd followed by the u slot.
template <class T>
T eval_node(const Node& n, std::span<const T> vars, bool has_u) {
  using std::abs;
  using std::cos;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sqrt;
  switch (n.kind) {
    case NodeKind::number:
      return T(n.number);
    case NodeKind::coord:
      return vars[static_cast<std::size_t>(n.coord)];
    case NodeKind::uvar:
      if (!has_u) throw FieldError("expression uses 'u' but no u value was supplied", n.offset);
      return vars[vars.size() - 1];
    case NodeKind::neg:
      return -eval_node(n.kids[0], vars, has_u);
    case NodeKind::add:
      return eval_node(n.kids[0], vars, has_u) + eval_node(n.kids[1], vars, has_u);
    case NodeKind::sub:
      return eval_node(n.kids[0], vars, has_u) - eval_node(n.kids[1], vars, has_u);
    case NodeKind::mul:
      return eval_node(n.kids[0], vars, has_u) * eval_node(n.kids[1], vars, has_u);
    case NodeKind::div: {
      const T num = eval_node(n.kids[0], vars, has_u);
      const T den = eval_node(n.kids[1], vars, has_u);
      if (value_part(den) == 0.0) throw FieldError("division by zero", n.offset);
      return num / den;
    }
    case NodeKind::pow: {
      const T base = eval_node(n.kids[0], vars, has_u);
      if (n.int_exponent) return pow_integer(base, *n.int_exponent, n.offset);
      const T expo = eval_node(n.kids[1], vars, has_u);
      if (value_part(base) <= 0.0)
        throw FieldError("power with non-integer exponent requires positive base", n.offset);
      return exp(expo * log(base));
    }
    case NodeKind::call: {
      const T arg = eval_node(n.kids[0], vars, has_u);
      switch (n.fn) {
        case Fn::sin: return sin(arg);
        case Fn::cos: return cos(arg);
        case Fn::exp: return exp(arg);
        case Fn::sqrt: {
          const double v = value_part(arg);
          if (v < 0.0) throw FieldError("sqrt of negative value", n.offset);
          if constexpr (carries_derivative<T>) {
            if (v == 0.0) {
              if (!components_match(arg, T(0.0), 0.0))
                throw FieldError("derivative of sqrt at zero", n.offset);
              return T(0.0);
            }
          }
          return sqrt(arg);
        }
        case Fn::abs: {
          const double v = value_part(arg);
          if (v > 0.0) return arg;
          if (v < 0.0) return -arg;
          if constexpr (carries_derivative<T>) {
            if (!components_match(arg, T(0.0), 0.0))
              throw FieldError("derivative of abs at zero", n.offset);
          }
          return T(0.0);
        }
      }
      throw FieldError("unreachable call kind", n.offset);
    }
    case NodeKind::piecewise: {
      const T lhs = eval_node(n.kids[0], vars, has_u);
      const T rhs = eval_node(n.kids[1], vars, has_u);
      const double lv = value_part(lhs), rv = value_part(rhs);
      if (lv == rv) {
        // Exactly on the seam: values take the first branch; a derivative
        // request additionally requires the two branches to agree to 1e-9.
        const T a = eval_node(n.kids[2], vars, has_u);
        if constexpr (carries_derivative<T>) {
          const T b = eval_node(n.kids[3], vars, has_u);
          if (!components_match(a, b, 1e-9))
            throw FieldError("derivative on a piecewise seam with mismatched branches", n.offset);
        }
        return a;
      }
      bool cond = false;
      switch (n.cmp) {
        case Cmp::lt: cond = lv < rv; break;
        case Cmp::le: cond = lv <= rv; break;
        case Cmp::gt: cond = lv > rv; break;
        case Cmp::ge: cond = lv >= rv; break;
        case Cmp::eq: cond = lv == rv; break;
      }
      return eval_node(cond ? n.kids[2] : n.kids[3], vars, has_u);
    }
    case NodeKind::vector:
      throw FieldError("vector expression evaluated in scalar context", n.offset);
  }
  throw FieldError("unreachable node kind", n.offset);
}

inline void pretty_node(const Node& n, std::string& out) {
  auto binary = [&](const char* op) {
    out += '(';
    pretty_node(n.kids[0], out);
    out += op;
    pretty_node(n.kids[1], out);
    out += ')';
  };
  switch (n.kind) {
    case NodeKind::number: {
      char buf[40];
      std::snprintf(buf, sizeof buf, "%.17g", n.number);
      out += buf;
      return;
    }
    case NodeKind::coord:
      out += 'x';
      out += std::to_string(n.coord + 1);
      return;
    case NodeKind::uvar: out += 'u'; return;
    case NodeKind::neg:
      out += "(-";
      pretty_node(n.kids[0], out);
      out += ')';
      return;
    case NodeKind::add: binary(" + "); return;
    case NodeKind::sub: binary(" - "); return;
    case NodeKind::mul: binary(" * "); return;
    case NodeKind::div: binary(" / "); return;
    case NodeKind::pow: binary("^"); return;
    case NodeKind::call: {
      switch (n.fn) {
        case Fn::sin: out += "sin"; break;
        case Fn::cos: out += "cos"; break;
        case Fn::exp: out += "exp"; break;
        case Fn::sqrt: out += "sqrt"; break;
        case Fn::abs: out += "abs"; break;
      }
      out += '(';
      pretty_node(n.kids[0], out);
      out += ')';
      return;
    }
    case NodeKind::piecewise: {
      out += "piecewise(";
      pretty_node(n.kids[0], out);
      switch (n.cmp) {
        case Cmp::lt: out += " < "; break;
        case Cmp::le: out += " <= "; break;
        case Cmp::gt: out += " > "; break;
        case Cmp::ge: out += " >= "; break;
        case Cmp::eq: out += " == "; break;
      }
      pretty_node(n.kids[1], out);
      out += ", ";
      pretty_node(n.kids[2], out);
      out += ", ";
      pretty_node(n.kids[3], out);
      out += ')';
      return;
    }
    case NodeKind::vector: {
      out += "vec(";
      for (std::size_t i = 0; i < n.kids.size(); ++i) {
        if (i) out += ", ";
        pretty_node(n.kids[i], out);
      }
      out += ')';
      return;
    }
  }
}

inline bool constant_fold(const Node& n, double* out) {
  switch (n.kind) {
    case NodeKind::number: *out = n.number; return true;
    case NodeKind::neg: {
      double v;
      if (!constant_fold(n.kids[0], &v)) return false;
      *out = -v;
      return true;
    }
    case NodeKind::add:
    case NodeKind::sub:
    case NodeKind::mul:
    case NodeKind::div: {
      double a, b;
      if (!constant_fold(n.kids[0], &a) || !constant_fold(n.kids[1], &b)) return false;
      switch (n.kind) {
        case NodeKind::add: *out = a + b; break;
        case NodeKind::sub: *out = a - b; break;
        case NodeKind::mul: *out = a * b; break;
        default:
          if (b == 0.0) return false;
          *out = a / b;
      }
      return true;
    }
    default: return false;
  }
}

inline void collect_seams(const Node& n, std::vector<Seam>& out) {
  if (n.kind == NodeKind::piecewise) {
    // Only conditions of the shape  coordinate cmp constant  (either order)
    // describe a hyperplane seam we can split integration steps at.
    const Node& l = n.kids[0];
    const Node& r = n.kids[1];
    double c;
    if (l.kind == NodeKind::coord && constant_fold(r, &c)) out.push_back({l.coord, c});
    else if (r.kind == NodeKind::coord && constant_fold(l, &c)) out.push_back({r.coord, c});
    else if (l.kind == NodeKind::uvar && constant_fold(r, &c)) out.push_back({-1, c});
    else if (r.kind == NodeKind::uvar && constant_fold(l, &c)) out.push_back({-1, c});
  }
  for (const Node& k : n.kids) collect_seams(k, out);
}

}  // namespace detail

using D1 = Dual<double>;
using D2 = Dual<Dual<double>>;

class FieldExpr {
public:
  FieldExpr() = default;

  static FieldExpr parse(std::string_view source, int dimension) {
    FieldExpr e;
    e.source_ = std::string(source);
    e.dimension_ = dimension;
    detail::Parser p(e.source_, dimension);
    e.root_ = std::make_shared<Node>(p.parse_toplevel(&e.arity_, &e.uses_u_));
    return e;
  }

  int dimension() const { return dimension_; }
  int arity() const { return arity_; }
  bool is_vector() const { return root_ && root_->kind == NodeKind::vector; }
  bool uses_u() const { return uses_u_; }
  const std::string& source() const { return source_; }

  std::string pretty() const {
    std::string out;
    detail::pretty_node(*root_, out);
    return out;
  }

  std::vector<Seam> seams() const {
    std::vector<Seam> s;
    detail::collect_seams(*root_, s);
    return s;
  }

  // Scalar evaluation. `point` must have `dimension()` entries.
  double eval(std::span<const double> point, double u = 0.0) const {
    check_point(point);
    std::vector<double> vars(point.begin(), point.end());
    vars.push_back(u);
    return detail::eval_node<double>(scalar_root(), vars, true);
  }

  // Vector evaluation; scalar expressions are accepted as 1-vectors.
  Vec eval_vector(std::span<const double> point, double u = 0.0) const {
    check_point(point);
    std::vector<double> vars(point.begin(), point.end());
    vars.push_back(u);
    Vec out;
    if (root_->kind == NodeKind::vector) {
      out.reserve(root_->kids.size());
      for (const auto& k : root_->kids) out.push_back(detail::eval_node<double>(k, vars, true));
    } else {
      out.push_back(detail::eval_node<double>(*root_, vars, true));
    }
    return out;
  }

  // Partial derivative of a scalar expression along coordinate `direction`
  // (0-based); direction == dimension() differentiates in u.
  double derivative(std::span<const double> point, int direction, double u = 0.0) const {
    check_point(point);
    std::vector<D1> vars = seed1(point, u, direction);
    return detail::eval_node<D1>(scalar_root(), vars, true).d;
  }

  // Component-wise partial derivatives of a vector expression.
  Vec derivative_vector(std::span<const double> point, int direction, double u = 0.0) const {
    check_point(point);
    std::vector<D1> vars = seed1(point, u, direction);
    Vec out;
    if (root_->kind == NodeKind::vector) {
      out.reserve(root_->kids.size());
      for (const auto& k : root_->kids) out.push_back(detail::eval_node<D1>(k, vars, true).d);
    } else {
      out.push_back(detail::eval_node<D1>(*root_, vars, true).d);
    }
    return out;
  }

  double second_derivative(std::span<const double> point, int dir_i, int dir_j,
                           double u = 0.0) const {
    check_point(point);
    const int nv = dimension_ + 1;
    std::vector<D2> vars(static_cast<std::size_t>(nv));
    for (int k = 0; k < nv; ++k) {
      const double base = k < dimension_ ? point[static_cast<std::size_t>(k)] : u;
      vars[static_cast<std::size_t>(k)] =
          D2(D1(base, k == dir_i ? 1.0 : 0.0), D1(k == dir_j ? 1.0 : 0.0, 0.0));
    }
    return detail::eval_node<D2>(scalar_root(), vars, true).d.d;
  }

private:
  std::string source_;
  std::shared_ptr<const Node> root_;
  int dimension_ = 0;
  int arity_ = 1;
  bool uses_u_ = false;

  const Node& scalar_root() const {
    if (root_->kind == NodeKind::vector)
      throw FieldError("vector expression used where a scalar was required", root_->offset);
    return *root_;
  }

  void check_point(std::span<const double> point) const {
    if (static_cast<int>(point.size()) != dimension_)
      throw Error("point dimension " + std::to_string(point.size()) +
                  " does not match expression dimension " + std::to_string(dimension_));
  }

  std::vector<D1> seed1(std::span<const double> point, double u, int direction) const {
    const int nv = dimension_ + 1;
    std::vector<D1> vars(static_cast<std::size_t>(nv));
    for (int k = 0; k < nv; ++k) {
      const double base = k < dimension_ ? point[static_cast<std::size_t>(k)] : u;
      vars[static_cast<std::size_t>(k)] = D1(base, k == direction ? 1.0 : 0.0);
    }
    return vars;
  }
};

}  // namespace fieldlang

using fieldlang::FieldExpr;
using fieldlang::Seam;

}  // namespace geoconnect

#endif  // GEOCONNECT_FIELDLANG_HPP
