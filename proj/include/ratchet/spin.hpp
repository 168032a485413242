#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ratchet {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

namespace spin {

// Angular momentum matrices for a single spin, hbar = 1. Basis order is
// m = s, s-1, ..., -s.
struct SpinOperatorSet {
  double s = 0.0;
  Matrix sz;
  Matrix splus;
  Matrix sminus;
  Matrix sx;
  Matrix sy;
  Matrix identity;

  int dim() const { return static_cast<int>(sz.rows()); }
};

// Throws std::invalid_argument unless 2s is a non-negative integer.
SpinOperatorSet spin_operators(double s);

// Magnetic quantum number carried by local basis index `k` of spin `s`.
inline double projection(double s, int k) { return s - k; }

struct Site {
  std::string label;
  double spin = 0.5;

  int dim() const { return static_cast<int>(2.0 * spin + 1.5); }
};

// Ordered tensor-product layout. Site 0 is the most significant factor of
// the Kronecker product, so global index = sum_k local_k * stride_k.
class HilbertLayout {
 public:
  HilbertLayout() = default;
  explicit HilbertLayout(std::vector<Site> sites);

  std::size_t add_site(std::string label, double s);

  std::size_t size() const { return sites_.size(); }
  const Site& site(std::size_t i) const;
  const std::vector<Site>& sites() const { return sites_; }
  int local_dim(std::size_t i) const { return site(i).dim(); }
  int dim() const;

  std::optional<std::size_t> find(std::string_view label) const;
  std::size_t index_of(std::string_view label) const;

  // Local basis indices of a global basis state, one per site.
  std::vector<int> local_indices(int global) const;
  int global_index(std::span<const int> local) const;

  // Global index of the product state with the given projections m_k.
  int index_of_projections(std::span<const double> m) const;

  // "|0,+1/2,-1/2>" style label for a basis state.
  std::string state_label(int global) const;

 private:
  std::vector<Site> sites_;
};

Matrix kron(const Matrix& a, const Matrix& b);

// I x ... x op x ... x I in the layout's site order.
Matrix embed(const Matrix& op, std::size_t site, const HilbertLayout& layout);

// embed(op_a, a) * embed(op_b, b), built directly as one Kronecker chain.
Matrix embed_product(const Matrix& op_a, std::size_t a, const Matrix& op_b,
                     std::size_t b, const HilbertLayout& layout);

}  // namespace spin
}  // namespace ratchet
