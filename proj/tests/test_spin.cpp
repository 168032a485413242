#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ratchet/spin.hpp"

using namespace ratchet;
using namespace ratchet::spin;

namespace {
double maxabs(const Matrix& m) { return m.cwiseAbs().maxCoeff(); }
}  // namespace

TEST_CASE("angular momentum algebra") {
  for (double s : {0.5, 1.0, 1.5}) {
    const auto o = spin_operators(s);
    CHECK(o.dim() == static_cast<int>(2 * s + 1));
    CHECK(maxabs(o.sx * o.sy - o.sy * o.sx - cplx(0, 1) * o.sz) < 1e-14);
    const Matrix casimir = o.sx * o.sx + o.sy * o.sy + o.sz * o.sz;
    CHECK(maxabs(casimir - s * (s + 1) * o.identity) < 1e-13);
    CHECK(o.sz(0, 0).real() == doctest::Approx(s));  // highest projection first
  }
}

TEST_CASE("invalid spin quantum numbers") {
  CHECK_THROWS_AS(spin_operators(0.3), std::invalid_argument);
  CHECK_THROWS_AS(spin_operators(-0.5), std::invalid_argument);
}

TEST_CASE("layout indexing") {
  HilbertLayout L;
  L.add_site("NV", 1.0);
  L.add_site("P1", 0.5);
  L.add_site("H", 0.5);
  CHECK(L.dim() == 12);
  CHECK_THROWS_AS(L.add_site("P1", 0.5), std::invalid_argument);
  CHECK(L.index_of("H") == 2);
  CHECK_FALSE(L.find("B1").has_value());
  CHECK_THROWS_AS(L.index_of("B1"), std::out_of_range);

  for (int g = 0; g < L.dim(); ++g) {
    const auto loc = L.local_indices(g);
    CHECK(L.global_index(loc) == g);
  }
  const std::vector<double> m{-1.0, -0.5, 0.5};
  const int g = L.index_of_projections(m);
  CHECK(L.local_indices(g) == std::vector<int>{2, 1, 0});
  CHECK(L.state_label(g) == "|-1,-1/2,+1/2>");
  const std::vector<double> bad{0.5, 0.5, 0.5};
  CHECK_THROWS(L.index_of_projections(bad));
}

TEST_CASE("embedding follows site order") {
  HilbertLayout L({{"A", 1.0}, {"B", 0.5}});
  const auto a = spin_operators(1.0);
  const auto b = spin_operators(0.5);
  CHECK(maxabs(embed(a.sz, 0, L) - kron(a.sz, b.identity)) < 1e-15);
  CHECK(maxabs(embed(b.sz, 1, L) - kron(a.identity, b.sz)) < 1e-15);
  CHECK(maxabs(embed_product(a.splus, 0, b.sminus, 1, L) - embed(a.splus, 0, L) * embed(b.sminus, 1, L)) < 1e-15);
  CHECK_THROWS_AS(embed(a.sz, 1, L), std::invalid_argument);
}
