#include "wmbridge/operators.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <map>
#include <sstream>

#include "wmbridge/errors.hpp"

namespace wmb {

namespace {

constexpr cplx kI{0.0, 1.0};

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

double falling(int a, int l) {
  double r = 1.0;
  for (int i = 0; i < l; ++i) r *= a - i;
  return r;
}

cplx ipow(int n) {
  switch (((n % 4) + 4) % 4) {
    case 0: return {1.0, 0.0};
    case 1: return {0.0, 1.0};
    case 2: return {-1.0, 0.0};
    default: return {0.0, -1.0};
  }
}

void check_powers(const Powers& x, const Powers& p) {
  for (int a = 0; a < 3; ++a)
    if (x[a] > kMaxPower || p[a] > kMaxPower)
      throw UnsupportedPower("power above " + std::to_string(kMaxPower) + " is not supported");
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(15);
  os << v;
  return os.str();
}

// one signed term: coefficient followed by its factors joined by `sep`
std::string format_term(cplx c, std::vector<std::string> factors, bool first, const std::string& sep) {
  bool neg = false;
  std::string mag;
  if (c.imag() == 0.0) {
    neg = c.real() < 0.0;
    const double m = std::abs(c.real());
    if (!(m == 1.0 && !factors.empty())) mag = fmt(m);
  } else if (c.real() == 0.0) {
    neg = c.imag() < 0.0;
    const double m = std::abs(c.imag());
    mag = m == 1.0 ? "i" : fmt(m) + "i";
  } else {
    mag = "(" + fmt(c.real()) + (c.imag() < 0.0 ? "-" : "+") + fmt(std::abs(c.imag())) + "i)";
  }
  if (!mag.empty()) factors.insert(factors.begin(), mag);
  std::string body;
  for (std::size_t i = 0; i < factors.size(); ++i) body += (i ? sep : "") + factors[i];
  const std::string prefix = first ? (neg ? "-" : "") : (neg ? " - " : " + ");
  return prefix + body;
}

std::string power_factor(const std::string& name, int power) {
  return power == 1 ? name : name + "^" + std::to_string(power);
}

std::string axis_name(const char* base, int axis, bool one_d) {
  return one_d ? std::string(base) : std::string(base) + std::to_string(axis + 1);
}

}  // namespace

// ---------------------------------------------------------------- expressions

ObservableExpr::ObservableExpr(std::vector<Monomial> terms) : terms_(std::move(terms)) { canonicalize(); }

ObservableExpr ObservableExpr::constant(cplx c) { return ObservableExpr({Monomial{c, {}, {}}}); }

ObservableExpr ObservableExpr::x(int axis) {
  Monomial m{1.0, {}, {}};
  m.x_pow[axis] = 1;
  return ObservableExpr({m});
}

ObservableExpr ObservableExpr::p(int axis) {
  Monomial m{1.0, {}, {}};
  m.p_pow[axis] = 1;
  return ObservableExpr({m});
}

void ObservableExpr::canonicalize() {
  std::map<std::pair<Powers, Powers>, cplx> merged;
  for (const auto& t : terms_) {
    check_powers(t.x_pow, t.p_pow);
    merged[{t.x_pow, t.p_pow}] += t.coeff;
  }
  terms_.clear();
  for (const auto& [key, c] : merged)
    if (c != cplx(0.0, 0.0)) terms_.push_back({c, key.first, key.second});
}

bool ObservableExpr::is_one_dimensional() const {
  for (const auto& t : terms_)
    for (int a = 1; a < 3; ++a)
      if (t.x_pow[a] != 0 || t.p_pow[a] != 0) return false;
  return true;
}

ObservableExpr ObservableExpr::operator+(const ObservableExpr& o) const {
  auto t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return ObservableExpr(std::move(t));
}

ObservableExpr ObservableExpr::operator-(const ObservableExpr& o) const { return *this + o.scaled(-1.0); }

ObservableExpr ObservableExpr::scaled(cplx c) const {
  auto t = terms_;
  for (auto& m : t) m.coeff *= c;
  return ObservableExpr(std::move(t));
}

ObservableExpr ObservableExpr::operator*(const ObservableExpr& o) const {
  std::vector<Monomial> out;
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) {
      Monomial m{a.coeff * b.coeff, {}, {}};
      for (int k = 0; k < 3; ++k) {
        m.x_pow[k] = a.x_pow[k] + b.x_pow[k];
        m.p_pow[k] = a.p_pow[k] + b.p_pow[k];
      }
      check_powers(m.x_pow, m.p_pow);
      out.push_back(m);
    }
  return ObservableExpr(std::move(out));
}

ObservableExpr ObservableExpr::pow(int exponent) const {
  if (exponent < 0) throw UnsupportedPower("negative powers are not supported");
  const bool is_const = terms_.empty() || (terms_.size() == 1 && terms_[0].x_pow == Powers{} && terms_[0].p_pow == Powers{});
  if (!is_const && exponent > kMaxPower)
    throw UnsupportedPower("power " + std::to_string(exponent) + " above " + std::to_string(kMaxPower));
  ObservableExpr r = constant(1.0);
  for (int i = 0; i < exponent; ++i) r = r * *this;
  return r;
}

std::string ObservableExpr::to_string() const {
  if (terms_.empty()) return "0";
  const bool one_d = is_one_dimensional();
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    std::vector<std::string> f;
    for (int a = 0; a < 3; ++a)
      if (t.x_pow[a]) f.push_back(power_factor(axis_name("x", a, one_d), t.x_pow[a]));
    for (int a = 0; a < 3; ++a)
      if (t.p_pow[a]) f.push_back(power_factor(axis_name("p", a, one_d), t.p_pow[a]));
    out += format_term(t.coeff, f, i == 0, "*");
  }
  return out;
}

// --------------------------------------------------------------------- parser

namespace {

class Parser {
 public:
  explicit Parser(const std::string& text) : text_(text) {}

  ObservableExpr parse() {
    skip();
    if (pos_ >= text_.size()) fail("empty expression");
    auto e = expr();
    skip();
    if (pos_ < text_.size()) unexpected();
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw SyntaxError(msg + " at column " + std::to_string(pos_ + 1), pos_ + 1);
  }

  [[noreturn]] void unexpected() const {
    if (text_[pos_] == '/') fail("division is not supported");
    fail(std::string("unexpected '") + text_[pos_] + "'");
  }

  void skip() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  ObservableExpr expr() {
    auto e = term();
    for (;;) {
      if (accept('+'))
        e = e + term();
      else if (accept('-'))
        e = e - term();
      else
        return e;
    }
  }

  ObservableExpr term() {
    auto e = unary();
    while (accept('*')) e = e * unary();
    skip();
    if (pos_ < text_.size() && text_[pos_] == '/') fail("division is not supported");
    return e;
  }

  ObservableExpr unary() {
    if (accept('-')) return unary().scaled(-1.0);
    if (accept('+')) return unary();
    return power();
  }

  ObservableExpr power() {
    auto base = primary();
    if (accept('^')) {
      skip();
      const std::size_t start = pos_;
      if (pos_ >= text_.size() || !std::isdigit(static_cast<unsigned char>(text_[pos_])))
        fail("exponent must be a non-negative integer");
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      if (pos_ < text_.size() && text_[pos_] == '.') fail("exponent must be a non-negative integer");
      const std::string digits = text_.substr(start, pos_ - start);
      if (digits.size() > 3) throw UnsupportedPower("exponent " + digits + " is not supported");
      return base.pow(std::stoi(digits));
    }
    return base;
  }

  ObservableExpr primary() {
    skip();
    if (pos_ >= text_.size()) fail("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      auto e = expr();
      if (!accept(')')) {
        if (pos_ >= text_.size()) fail("missing ')'");
        unexpected();
      }
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c))) return variable();
    unexpected();
  }

  ObservableExpr number() {
    const std::size_t start = pos_;
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(text_.substr(start), &used);
    } catch (const std::exception&) {
      fail("malformed number");
    }
    pos_ = start + used;
    return ObservableExpr::constant(v);
  }

  ObservableExpr variable() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isalnum(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    const std::string name = text_.substr(start, pos_ - start);
    auto axis_of = [&](char digit) -> int {
      if (digit < '1' || digit > '3') {
        pos_ = start;
        fail("unknown variable '" + name + "'");
      }
      return digit - '1';
    };
    if (name == "x") return ObservableExpr::x(0);
    if (name == "p") return ObservableExpr::p(0);
    if (name.size() == 2 && name[0] == 'x') return ObservableExpr::x(axis_of(name[1]));
    if (name.size() == 2 && name[0] == 'p') return ObservableExpr::p(axis_of(name[1]));
    if (name.size() == 2 && name[0] == 'L') {
      // L_i = eps_ijk x_j p_k
      const int i = axis_of(name[1]);
      const int j = (i + 1) % 3;
      const int k = (i + 2) % 3;
      return ObservableExpr::x(j) * ObservableExpr::p(k) - ObservableExpr::x(k) * ObservableExpr::p(j);
    }
    pos_ = start;
    fail("unknown variable '" + name + "'");
  }

  const std::string& text_;
  std::size_t pos_ = 0;
};

}  // namespace

ObservableExpr parse_observable(const std::string& text) { return Parser(text).parse(); }

// ------------------------------------------------------------ density operator

cplx DensityOperator::expanded_coefficient(std::size_t i) const {
  const auto& t = terms[i];
  return t.coeff * ipow(-t.ddx_pow) * std::pow(hbar, t.ddx_pow);
}

std::string DensityOperator::to_string() const {
  if (terms.empty()) return "0";
  std::string out;
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const auto& t = terms[i];
    std::vector<std::string> f;
    // (-i hbar)^b
    cplx c = t.coeff * ipow(-t.ddx_pow);
    if (t.ddx_pow) f.push_back(power_factor("hbar", t.ddx_pow));
    if (t.x_pow) f.push_back(power_factor("x", t.x_pow));
    if (t.ddx_pow == 1) f.push_back("d/d(dx)");
    if (t.ddx_pow > 1) f.push_back("d^" + std::to_string(t.ddx_pow) + "/d(dx)^" + std::to_string(t.ddx_pow));
    out += format_term(c, f, i == 0, " ");
  }
  return out;
}

DensityOperator compile_density_operator(const ObservableExpr& expr, const PhysicsParams& params) {
  params.validate();
  if (!expr.is_one_dimensional()) throw InputError("density operators act on one-dimensional fields");
  DensityOperator op;
  op.hbar = params.hbar;
  for (const auto& m : expr.terms()) op.terms.push_back({m.coeff, m.x_pow[0], m.p_pow[0]});
  return op;
}

// ---------------------------------------------------------- amplitude algebra

AmplitudeOperatorExpr::AmplitudeOperatorExpr(std::vector<AmplitudeTerm> terms, double hbar)
    : terms_(std::move(terms)), hbar_(hbar) {
  canonicalize();
}

AmplitudeOperatorExpr AmplitudeOperatorExpr::identity(double hbar) {
  return AmplitudeOperatorExpr({AmplitudeTerm{1.0, {}, {}, 0}}, hbar);
}

void AmplitudeOperatorExpr::canonicalize() {
  std::map<std::tuple<Powers, Powers, int>, cplx> merged;
  for (const auto& t : terms_) merged[{t.x_pow, t.p_pow, t.hbar_pow}] += t.coeff;
  terms_.clear();
  for (const auto& [key, c] : merged)
    if (std::abs(c) > 1e-13) terms_.push_back({c, std::get<0>(key), std::get<1>(key), std::get<2>(key)});
  // lowest hbar order first, then highest degree
  auto degree = [](const AmplitudeTerm& t) {
    int d = 0;
    for (int a = 0; a < 3; ++a) d += t.x_pow[a] + t.p_pow[a];
    return d;
  };
  std::stable_sort(terms_.begin(), terms_.end(), [&](const AmplitudeTerm& a, const AmplitudeTerm& b) {
    if (a.hbar_pow != b.hbar_pow) return a.hbar_pow < b.hbar_pow;
    return degree(a) > degree(b);
  });
}

bool AmplitudeOperatorExpr::is_one_dimensional() const {
  for (const auto& t : terms_)
    for (int a = 1; a < 3; ++a)
      if (t.x_pow[a] != 0 || t.p_pow[a] != 0) return false;
  return true;
}

AmplitudeOperatorExpr AmplitudeOperatorExpr::operator+(const AmplitudeOperatorExpr& o) const {
  auto t = terms_;
  t.insert(t.end(), o.terms_.begin(), o.terms_.end());
  return AmplitudeOperatorExpr(std::move(t), hbar_);
}

AmplitudeOperatorExpr AmplitudeOperatorExpr::operator-(const AmplitudeOperatorExpr& o) const {
  return *this + o.scaled(-1.0);
}

AmplitudeOperatorExpr AmplitudeOperatorExpr::scaled(cplx c) const {
  auto t = terms_;
  for (auto& m : t) m.coeff *= c;
  return AmplitudeOperatorExpr(std::move(t), hbar_);
}

AmplitudeOperatorExpr AmplitudeOperatorExpr::operator*(const AmplitudeOperatorExpr& o) const {
  std::vector<AmplitudeTerm> out;
  for (const auto& a : terms_)
    for (const auto& b : o.terms_) {
      // X^a P^b X^c P^d, axis by axis: P^b X^c = sum_k C(b,k) C(c,k) k! (-i hbar)^k X^(c-k) P^(b-k)
      std::vector<AmplitudeTerm> partial{{a.coeff * b.coeff, {}, {}, a.hbar_pow + b.hbar_pow}};
      for (int ax = 0; ax < 3; ++ax) {
        std::vector<AmplitudeTerm> next;
        const int pb = a.p_pow[ax];
        const int xc = b.x_pow[ax];
        for (int k = 0; k <= std::min(pb, xc); ++k) {
          const double w = binomial(pb, k) * binomial(xc, k) * falling(k, k);
          for (auto t : partial) {
            t.coeff *= w * ipow(-k);
            t.hbar_pow += k;
            t.x_pow[ax] = a.x_pow[ax] + xc - k;
            t.p_pow[ax] = pb - k + b.p_pow[ax];
            next.push_back(t);
          }
        }
        partial = std::move(next);
      }
      out.insert(out.end(), partial.begin(), partial.end());
    }
  return AmplitudeOperatorExpr(std::move(out), hbar_);
}

AmplitudeOperatorExpr commutator(const AmplitudeOperatorExpr& a, const AmplitudeOperatorExpr& b) {
  return a * b - b * a;
}

std::string AmplitudeOperatorExpr::to_string() const {
  if (terms_.empty()) return "0";
  const bool one_d = is_one_dimensional();
  std::string out;
  for (std::size_t i = 0; i < terms_.size(); ++i) {
    const auto& t = terms_[i];
    std::vector<std::string> f;
    if (t.hbar_pow) f.push_back(power_factor("hbar", t.hbar_pow));
    for (int a = 0; a < 3; ++a)
      if (t.x_pow[a]) f.push_back(power_factor(axis_name("X", a, one_d), t.x_pow[a]));
    for (int a = 0; a < 3; ++a)
      if (t.p_pow[a]) f.push_back(power_factor(axis_name("P", a, one_d), t.p_pow[a]));
    out += format_term(t.coeff, f, i == 0, " ");
  }
  return out;
}

nlohmann::json AmplitudeOperatorExpr::to_json() const {
  const bool one_d = is_one_dimensional();
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& t : terms_) {
    nlohmann::json j;
    j["coeff_re"] = t.coeff.real();
    j["coeff_im"] = t.coeff.imag();
    if (one_d) {
      j["x_pow"] = t.x_pow[0];
      j["p_pow"] = t.p_pow[0];
    } else {
      j["x_pow"] = t.x_pow;
      j["p_pow"] = t.p_pow;
    }
    j["hbar_pow"] = t.hbar_pow;
    arr.push_back(j);
  }
  return arr;
}

AmplitudeOperatorExpr AmplitudeOperatorExpr::from_json(const nlohmann::json& j, double hbar) {
  if (!j.is_array()) throw InputError("operator JSON must be an array of terms");
  auto powers = [](const nlohmann::json& v) {
    Powers p{};
    if (v.is_number_integer())
      p[0] = v.get<int>();
    else
      p = v.get<Powers>();
    return p;
  };
  std::vector<AmplitudeTerm> terms;
  for (const auto& t : j)
    terms.push_back({cplx(t.at("coeff_re").get<double>(), t.at("coeff_im").get<double>()), powers(t.at("x_pow")),
                     powers(t.at("p_pow")), t.at("hbar_pow").get<int>()});
  return AmplitudeOperatorExpr(std::move(terms), hbar);
}

// ------------------------------------------------------------------ reduction

namespace {

// derivative orders on conj(psi) (j) and psi (k), per axis
struct Split {
  Powers j{};
  Powers k{};
};

bool exceeds(const Powers& a, const Powers& b) {
  const int sa = a[0] + a[1] + a[2];
  const int sb = b[0] + b[1] + b[2];
  if (sa != sb) return sa > sb;
  return a > b;
}

}  // namespace

AmplitudeOperatorExpr reduce_to_amplitude_operator(const ObservableExpr& expr, const PhysicsParams& params) {
  params.validate();
  std::vector<AmplitudeTerm> out;
  for (const auto& m : expr.terms()) {
    const Powers& a = m.x_pow;
    const Powers& b = m.p_pow;
    // Leibniz on d^b/d(dx)^b of conj(psi(x - dx/2)) psi(x + dx/2) at dx = 0:
    // sum_k C(b,k) 2^-b (-1)^(b-k) conj(psi)^(b-k) psi^(k), times (-i hbar)^b
    for (int k0 = 0; k0 <= b[0]; ++k0)
      for (int k1 = 0; k1 <= b[1]; ++k1)
        for (int k2 = 0; k2 <= b[2]; ++k2) {
          Split s;
          s.k = {k0, k1, k2};
          cplx w = m.coeff;
          int hb = 0;
          for (int ax = 0; ax < 3; ++ax) {
            s.j[ax] = b[ax] - s.k[ax];
            w *= ipow(-b[ax]) * binomial(b[ax], s.k[ax]) * std::ldexp(1.0, -b[ax]) * (s.j[ax] % 2 ? -1.0 : 1.0);
            hb += b[ax];
          }
          // Re-equivalent fold: conj(psi)^(j) psi^(k) -> conj(psi)^(k) psi^(j) with conj(w)
          if (exceeds(s.j, s.k)) {
            std::swap(s.j, s.k);
            w = std::conj(w);
          }
          // integrate by parts j times onto x^a psi^(k), then psi^(n) = (i/hbar)^n P^n psi
          std::vector<AmplitudeTerm> partial{{w, {}, {}, hb}};
          for (int ax = 0; ax < 3; ++ax) {
            std::vector<AmplitudeTerm> next;
            const int jj = s.j[ax];
            for (int l = 0; l <= std::min(jj, a[ax]); ++l) {
              const int order = b[ax] - l;
              const double c = (jj % 2 ? -1.0 : 1.0) * binomial(jj, l) * falling(a[ax], l);
              for (auto t : partial) {
                t.coeff *= c * ipow(order);
                t.hbar_pow -= order;
                t.x_pow[ax] = a[ax] - l;
                t.p_pow[ax] = order;
                next.push_back(t);
              }
            }
            partial = std::move(next);
          }
          out.insert(out.end(), partial.begin(), partial.end());
        }
  }
  return AmplitudeOperatorExpr(std::move(out), params.hbar);
}

// ------------------------------------------------------------------ numerics

namespace {

double hbar_power(double hbar, int k) { return std::pow(hbar, k); }

// P^b psi = (-i hbar d/dx)^b psi, spectrally
std::vector<cplx> momentum_power(const std::vector<cplx>& psi, const Grid1D& grid, double hbar, int b) {
  if (b == 0) return psi;
  auto d = spectral_derivative(std::span<const cplx>(psi), grid, b);
  const cplx f = ipow(-b) * hbar_power(hbar, b);
  for (auto& v : d) v *= f;
  return d;
}

void require_1d(const AmplitudeOperatorExpr& op) {
  if (!op.is_one_dimensional()) throw InputError("operator acts on more than one axis");
}

}  // namespace

std::vector<cplx> apply_amplitude_operator(const AmplitudeOperatorExpr& op, const Amplitude& psi) {
  require_1d(op);
  const auto& grid = psi.grid();
  const std::size_t n = psi.size();
  std::map<int, std::vector<cplx>> cache;
  std::vector<cplx> out(n, cplx{});
  for (const auto& t : op.terms()) {
    check_powers(t.x_pow, t.p_pow);
    auto it = cache.find(t.p_pow[0]);
    if (it == cache.end()) it = cache.emplace(t.p_pow[0], momentum_power(psi.values(), grid, op.hbar(), t.p_pow[0])).first;
    const cplx c = t.coeff * hbar_power(op.hbar(), t.hbar_pow);
    for (std::size_t j = 0; j < n; ++j) out[j] += c * std::pow(grid.point(j), t.x_pow[0]) * it->second[j];
  }
  return out;
}

std::vector<cplx> apply_amplitude_operator_3d(const AmplitudeOperatorExpr& op, const std::vector<cplx>& psi,
                                              const Grid1D& axis) {
  const std::size_t n = axis.size();
  if (psi.size() != n * n * n) throw GridMismatch("3-D amplitude does not match n^3");
  const std::array<std::size_t, 3> shape{n, n, n};
  const double hbar = op.hbar();
  std::vector<cplx> out(psi.size(), cplx{});
  for (const auto& t : op.terms()) {
    check_powers(t.x_pow, t.p_pow);
    std::vector<cplx> work = psi;
    for (std::size_t ax = 0; ax < 3; ++ax) {
      const int b = t.p_pow[ax];
      if (b == 0) continue;
      fft_axis(work, shape, ax, FftDirection::forward);
      const std::size_t stride = ax == 0 ? n * n : (ax == 1 ? n : 1);
      for (std::size_t i = 0; i < work.size(); ++i) {
        const std::size_t q = (i / stride) % n;
        double f = (b % 2 && q == n / 2) ? 0.0 : std::pow(hbar * axis.wavenumber(q), b);
        work[i] *= f / static_cast<double>(n);
      }
      fft_axis(work, shape, ax, FftDirection::backward);
    }
    const cplx c = t.coeff * hbar_power(hbar, t.hbar_pow);
    for (std::size_t i0 = 0; i0 < n; ++i0)
      for (std::size_t i1 = 0; i1 < n; ++i1)
        for (std::size_t i2 = 0; i2 < n; ++i2) {
          const std::size_t i = (i0 * n + i1) * n + i2;
          const double xf = std::pow(axis.point(i0), t.x_pow[0]) * std::pow(axis.point(i1), t.x_pow[1]) *
                            std::pow(axis.point(i2), t.x_pow[2]);
          out[i] += c * xf * work[i];
        }
  }
  return out;
}

namespace {

// (-i hbar d/d(dx))^b along every row, without the hbar factor: returns d^b/d(dx)^b
std::vector<cplx> ddx_power(const std::vector<cplx>& values, const Grid1D& gd, int b) {
  if (b == 0) return values;
  const std::size_t n = gd.size();
  std::vector<cplx> work = values;
  const std::array<std::size_t, 2> shape{n, n};
  fft_axis(work, shape, 1, FftDirection::forward);
  for (std::size_t ix = 0; ix < n; ++ix)
    for (std::size_t q = 0; q < n; ++q) {
      const cplx f = (b % 2 && q == n / 2) ? cplx{} : std::pow(kI * gd.wavenumber(q), b);
      work[ix * n + q] *= f / static_cast<double>(n);
    }
  fft_axis(work, shape, 1, FftDirection::backward);
  return work;
}

void multiply_x_power(std::vector<cplx>& values, const Grid1D& gy, int a) {
  if (a == 0) return;
  const std::size_t n = gy.size();
  for (std::size_t ix = 0; ix < n; ++ix) {
    const double w = std::pow(gy.point(ix), a);
    for (std::size_t k = 0; k < n; ++k) values[ix * n + k] *= w;
  }
}

void check_density_term(const DensityTerm& t) {
  if (t.x_pow > kMaxPower || t.ddx_pow > kMaxPower) throw UnsupportedPower("power above 8 is not supported");
}

}  // namespace

std::vector<cplx> apply_density_operator(const DensityOperator& op, const DensityField& rho) {
  const std::size_t n = rho.size();
  std::vector<cplx> out(n * n, cplx{});
  std::map<int, std::vector<cplx>> cache;
  for (std::size_t i = 0; i < op.terms.size(); ++i) {
    const auto& t = op.terms[i];
    check_density_term(t);
    auto it = cache.find(t.ddx_pow);
    if (it == cache.end()) it = cache.emplace(t.ddx_pow, ddx_power(rho.values(), rho.grid_dy(), t.ddx_pow)).first;
    const cplx c = op.expanded_coefficient(i);
    for (std::size_t ix = 0; ix < n; ++ix) {
      const cplx cx = c * std::pow(rho.grid_y().point(ix), t.x_pow);
      for (std::size_t k = 0; k < n; ++k) out[ix * n + k] += cx * it->second[ix * n + k];
    }
  }
  return out;
}

double expect_density(const DensityOperator& op, const DensityField& rho, double* imag_residue) {
  const std::size_t n = rho.size();
  const auto& gy = rho.grid_y();
  const auto& gd = rho.grid_dy();
  std::vector<cplx> spectrum;
  // d^b rho / d(dx)^b at dx = 0 from the row spectrum: column n/2 picks up (-1)^q
  auto diagonal_derivative = [&](std::size_t ix, int b) -> cplx {
    if (b == 0) return rho.at(ix, rho.diagonal_column());
    cplx s{};
    for (std::size_t q = 0; q < n; ++q) {
      if (b % 2 && q == n / 2) continue;
      const cplx v = std::pow(kI * gd.wavenumber(q), b) * spectrum[ix * n + q];
      s += (q % 2) ? -v : v;
    }
    return s / static_cast<double>(n);
  };
  bool need_fft = false;
  for (const auto& t : op.terms) {
    check_density_term(t);
    need_fft = need_fft || t.ddx_pow > 0;
  }
  if (need_fft) {
    spectrum = rho.values();
    const std::array<std::size_t, 2> shape{n, n};
    fft_axis(spectrum, shape, 1, FftDirection::forward);
  }
  cplx total{};
  for (std::size_t i = 0; i < op.terms.size(); ++i) {
    const auto& t = op.terms[i];
    cplx s{};
    for (std::size_t ix = 0; ix < n; ++ix) s += std::pow(gy.point(ix), t.x_pow) * diagonal_derivative(ix, t.ddx_pow);
    total += op.expanded_coefficient(i) * s * gy.spacing();
  }
  if (imag_residue) *imag_residue = total.imag();
  return total.real();
}

double expect_amplitude(const AmplitudeOperatorExpr& op, const Amplitude& psi, double* imag_residue) {
  const auto o = apply_amplitude_operator(op, psi);
  cplx s{};
  for (std::size_t j = 0; j < o.size(); ++j) s += std::conj(psi.values()[j]) * o[j];
  s *= psi.grid().spacing();
  if (imag_residue) *imag_residue = s.imag();
  return s.real();
}

double expect_phase_space(const ObservableExpr& expr, const PhaseSpaceField& f) {
  if (!expr.is_one_dimensional()) throw InputError("phase-space fields are one-dimensional");
  const auto& g = f.grid();
  cplx total{};
  for (std::size_t ix = 0; ix < g.nx(); ++ix) {
    const double x = g.x_axis().point(ix);
    for (std::size_t ip = 0; ip < g.np(); ++ip) {
      const double p = g.p_axis().point(ip);
      cplx v{};
      for (const auto& m : expr.terms()) v += m.coeff * std::pow(x, m.x_pow[0]) * std::pow(p, m.p_pow[0]);
      total += v * f.at(ix, ip);
    }
  }
  return total.real() * g.x_axis().spacing() * g.p_axis().spacing();
}

namespace {

// X^a1 P^b1 X^a2 P^b2 with adjacent letters of one kind merged, applied right to left
std::vector<cplx> apply_word(const AmplitudeTerm& left, const AmplitudeTerm& right, double hbar, const Amplitude& psi) {
  std::vector<std::pair<char, int>> letters{{'X', left.x_pow[0]}, {'P', left.p_pow[0]}, {'X', right.x_pow[0]},
                                            {'P', right.p_pow[0]}};
  std::vector<std::pair<char, int>> word;
  for (const auto& l : letters) {
    if (l.second == 0) continue;
    if (!word.empty() && word.back().first == l.first)
      word.back().second += l.second;
    else
      word.push_back(l);
  }
  const auto& grid = psi.grid();
  std::vector<cplx> v = psi.values();
  for (auto it = word.rbegin(); it != word.rend(); ++it) {
    if (it->first == 'P') {
      v = momentum_power(v, grid, hbar, it->second);
    } else {
      for (std::size_t j = 0; j < v.size(); ++j) v[j] *= std::pow(grid.point(j), it->second);
    }
  }
  const cplx c = left.coeff * right.coeff * hbar_power(hbar, left.hbar_pow + right.hbar_pow);
  for (auto& x : v) x *= c;
  return v;
}

std::vector<cplx> apply_product(const AmplitudeOperatorExpr& a, const AmplitudeOperatorExpr& b, const Amplitude& psi) {
  std::vector<cplx> out(psi.size(), cplx{});
  for (const auto& ta : a.terms())
    for (const auto& tb : b.terms()) {
      const auto w = apply_word(ta, tb, a.hbar(), psi);
      for (std::size_t j = 0; j < out.size(); ++j) out[j] += w[j];
    }
  return out;
}

double l2(const std::vector<cplx>& r, double dx) {
  double s = 0.0;
  for (const auto& v : r) s += std::norm(v);
  return std::sqrt(s * dx);
}

}  // namespace

double commutator_residual(const ObservableExpr& a, const ObservableExpr& b, const Amplitude& probe,
                           const PhysicsParams& params) {
  const auto oa = reduce_to_amplitude_operator(a, params);
  const auto ob = reduce_to_amplitude_operator(b, params);
  require_1d(oa);
  require_1d(ob);
  const auto ab = apply_product(oa, ob, probe);
  const auto ba = apply_product(ob, oa, probe);
  const auto expected = apply_amplitude_operator(commutator(oa, ob), probe);
  std::vector<cplx> r(ab.size());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = ab[j] - ba[j] - expected[j];
  return l2(r, probe.grid().spacing());
}

double commutator_residual(const ObservableExpr& a, const ObservableExpr& b, const DensityField& probe,
                           const PhysicsParams& params) {
  const auto oa = compile_density_operator(a, params);
  const auto ob = compile_density_operator(b, params);
  const auto& gy = probe.grid_y();
  const auto& gd = probe.grid_dy();
  // x^a1 D^b1 x^a2 D^b2 with adjacent letters of one kind merged, right to left
  auto product = [&](const DensityOperator& l, const DensityOperator& r) {
    std::vector<cplx> out(probe.values().size(), cplx{});
    for (std::size_t i = 0; i < l.terms.size(); ++i)
      for (std::size_t j = 0; j < r.terms.size(); ++j) {
        const auto& tl = l.terms[i];
        const auto& tr = r.terms[j];
        check_density_term(tl);
        check_density_term(tr);
        std::vector<std::pair<char, int>> word;
        for (const auto& letter : {std::pair<char, int>{'x', tl.x_pow}, {'D', tl.ddx_pow}, {'x', tr.x_pow},
                                   {'D', tr.ddx_pow}}) {
          if (letter.second == 0) continue;
          if (!word.empty() && word.back().first == letter.first)
            word.back().second += letter.second;
          else
            word.push_back(letter);
        }
        std::vector<cplx> v = probe.values();
        for (auto it = word.rbegin(); it != word.rend(); ++it) {
          if (it->first == 'D')
            v = ddx_power(v, gd, it->second);
          else
            multiply_x_power(v, gy, it->second);
        }
        const cplx c = l.expanded_coefficient(i) * r.expanded_coefficient(j);
        for (std::size_t k = 0; k < v.size(); ++k) out[k] += c * v[k];
      }
    return out;
  };
  const auto ab = product(oa, ob);
  const auto ba = product(ob, oa);
  std::vector<cplx> r(ab.size());
  for (std::size_t j = 0; j < r.size(); ++j) r[j] = ab[j] - ba[j];
  const double dx = gy.spacing();
  return l2(r, dx * dx);
}

double uncertainty_product(const PhaseSpaceField& f) {
  const auto& g = f.grid();
  double w = 0.0, mx = 0.0, mp = 0.0, mxx = 0.0, mpp = 0.0;
  for (std::size_t ix = 0; ix < g.nx(); ++ix) {
    const double x = g.x_axis().point(ix);
    for (std::size_t ip = 0; ip < g.np(); ++ip) {
      const double p = g.p_axis().point(ip);
      const double v = f.at(ix, ip);
      w += v;
      mx += v * x;
      mp += v * p;
      mxx += v * x * x;
      mpp += v * p * p;
    }
  }
  mx /= w;
  mp /= w;
  return std::sqrt(std::max(0.0, mxx / w - mx * mx)) * std::sqrt(std::max(0.0, mpp / w - mp * mp));
}

double uncertainty_product(const DensityField& rho) {
  PhysicsParams params;
  params.hbar = rho.hbar();
  const double tr = rho.trace();
  auto moment = [&](const char* text) {
    return expect_density(compile_density_operator(parse_observable(text), params), rho) / tr;
  };
  const double mx = moment("x");
  const double mp = moment("p");
  const double vx = moment("x^2") - mx * mx;
  const double vp = moment("p^2") - mp * mp;
  return std::sqrt(std::max(0.0, vx)) * std::sqrt(std::max(0.0, vp));
}

double uncertainty_product(const Amplitude& psi, double hbar) {
  PhysicsParams params;
  params.hbar = hbar;
  const double nrm = psi.norm_squared();
  auto moment = [&](const char* text) {
    return expect_amplitude(reduce_to_amplitude_operator(parse_observable(text), params), psi) / nrm;
  };
  const double mx = moment("x");
  const double mp = moment("p");
  const double vx = moment("x^2") - mx * mx;
  const double vp = moment("p^2") - mp * mp;
  return std::sqrt(std::max(0.0, vx)) * std::sqrt(std::max(0.0, vp));
}

}  // namespace wmb
