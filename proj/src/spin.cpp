#include "ratchet/spin.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace ratchet::spin {

SpinOperatorSet spin_operators(double s) {
  const double twice = 2.0 * s;
  if (!(s >= 0.0) || std::abs(twice - std::round(twice)) > 1e-12) {
    throw std::invalid_argument("spin quantum number must be a non-negative half-integer, got " +
                                std::to_string(s));
  }
  const int n = static_cast<int>(std::round(twice)) + 1;

  SpinOperatorSet ops;
  ops.s = s;
  ops.sz = Matrix::Zero(n, n);
  ops.splus = Matrix::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    const double m = projection(s, k);
    ops.sz(k, k) = m;
    // S+ |m> = sqrt(s(s+1) - m(m+1)) |m+1>, and |m+1> sits at index k-1.
    if (k > 0) ops.splus(k - 1, k) = std::sqrt(s * (s + 1.0) - m * (m + 1.0));
  }
  ops.sminus = ops.splus.adjoint();
  ops.sx = 0.5 * (ops.splus + ops.sminus);
  ops.sy = cplx(0.0, -0.5) * (ops.splus - ops.sminus);
  ops.identity = Matrix::Identity(n, n);
  return ops;
}

HilbertLayout::HilbertLayout(std::vector<Site> sites) {
  for (auto& s : sites) add_site(std::move(s.label), s.spin);
}

std::size_t HilbertLayout::add_site(std::string label, double s) {
  if (find(label)) throw std::invalid_argument("duplicate site label: " + label);
  spin_operators(s);  // validates s
  sites_.push_back(Site{std::move(label), s});
  return sites_.size() - 1;
}

const Site& HilbertLayout::site(std::size_t i) const {
  if (i >= sites_.size()) {
    throw std::out_of_range("site index " + std::to_string(i) + " out of range (layout has " +
                            std::to_string(sites_.size()) + " sites)");
  }
  return sites_[i];
}

int HilbertLayout::dim() const {
  int d = 1;
  for (const auto& s : sites_) d *= s.dim();
  return d;
}

std::optional<std::size_t> HilbertLayout::find(std::string_view label) const {
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    if (sites_[i].label == label) return i;
  }
  return std::nullopt;
}

std::size_t HilbertLayout::index_of(std::string_view label) const {
  if (auto i = find(label)) return *i;
  throw std::out_of_range("no site labelled " + std::string(label));
}

std::vector<int> HilbertLayout::local_indices(int global) const {
  std::vector<int> local(sites_.size());
  for (std::size_t k = sites_.size(); k-- > 0;) {
    const int d = sites_[k].dim();
    local[k] = global % d;
    global /= d;
  }
  return local;
}

int HilbertLayout::global_index(std::span<const int> local) const {
  if (local.size() != sites_.size()) throw std::invalid_argument("wrong number of local indices");
  int g = 0;
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    if (local[k] < 0 || local[k] >= sites_[k].dim()) throw std::out_of_range("local index out of range");
    g = g * sites_[k].dim() + local[k];
  }
  return g;
}

int HilbertLayout::index_of_projections(std::span<const double> m) const {
  if (m.size() != sites_.size()) throw std::invalid_argument("wrong number of projections");
  std::vector<int> local(sites_.size());
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    const double kk = sites_[k].spin - m[k];
    local[k] = static_cast<int>(std::lround(kk));
    if (std::abs(kk - local[k]) > 1e-9) throw std::invalid_argument("invalid projection");
  }
  return global_index(local);
}

namespace {

std::string format_projection(double m) {
  const long twice = std::lround(2.0 * m);
  if (twice == 0) return "0";
  std::ostringstream os;
  os << (twice > 0 ? "+" : "-");
  if (twice % 2 == 0) {
    os << std::abs(twice / 2);
  } else {
    os << std::abs(twice) << "/2";
  }
  return os.str();
}

}  // namespace

std::string HilbertLayout::state_label(int global) const {
  const auto local = local_indices(global);
  std::string out = "|";
  for (std::size_t k = 0; k < sites_.size(); ++k) {
    if (k) out += ",";
    out += format_projection(projection(sites_[k].spin, local[k]));
  }
  return out + ">";
}

Matrix kron(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

namespace {

Matrix chain(const std::vector<Matrix>& factors) {
  Matrix out = Matrix::Identity(1, 1);
  for (const auto& f : factors) out = kron(out, f);
  return out;
}

void check_operator(const Matrix& op, std::size_t site, const HilbertLayout& layout) {
  const int d = layout.local_dim(site);
  if (op.rows() != d || op.cols() != d) {
    throw std::invalid_argument("operator dimension " + std::to_string(op.rows()) + "x" +
                                std::to_string(op.cols()) + " does not match site '" +
                                layout.site(site).label + "' of dimension " + std::to_string(d));
  }
}

}  // namespace

Matrix embed(const Matrix& op, std::size_t site, const HilbertLayout& layout) {
  check_operator(op, site, layout);
  std::vector<Matrix> factors;
  factors.reserve(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const int d = layout.local_dim(k);
    factors.push_back(k == site ? op : Matrix::Identity(d, d));
  }
  return chain(factors);
}

Matrix embed_product(const Matrix& op_a, std::size_t a, const Matrix& op_b, std::size_t b,
                     const HilbertLayout& layout) {
  check_operator(op_a, a, layout);
  check_operator(op_b, b, layout);
  std::vector<Matrix> factors;
  factors.reserve(layout.size());
  for (std::size_t k = 0; k < layout.size(); ++k) {
    const int d = layout.local_dim(k);
    Matrix f = Matrix::Identity(d, d);
    if (k == a) f = op_a * f;
    if (k == b) f = f * op_b;
    factors.push_back(std::move(f));
  }
  return chain(factors);
}

}  // namespace ratchet::spin
