#include <doctest.h>

#include "arbor/antichain.hpp"
#include "arbor/grigfilt.hpp"

using namespace arbor;

TEST_CASE("filtration step sizes") {
  CHECK(nm_step_logdim(1) == 3);
  CHECK(nm_step_logdim(2) == 6);
  CHECK(nm_step_logdim(3) == 12);
  CHECK_THROWS(nm_step_logdim(0));
}

TEST_CASE("gamma closed form") {
  CHECK(gamma_rel_logindex(3, 1) == 2);
  CHECK(gamma_rel_logindex(3, 4) == 8);
  for (unsigned m = 1; m <= 8; ++m)
    CHECK(gamma_rel_logindex(m, (1ul << m) - 1) + 1 == nm_step_logdim(m));
  CHECK_THROWS(gamma_rel_logindex(3, 8));
  // strictly increasing, and the two branches meet at r = 2^{m-1}
  for (unsigned m = 2; m <= 8; ++m) {
    for (unsigned long r = 2; r <= (1ul << m) - 1; ++r)
      CHECK(gamma_rel_logindex(m, r) > gamma_rel_logindex(m, r - 1));
    CHECK(2 * ((1l << (m - 1)) - 1) + 2 == (1l << (m - 1)) + (1l << (m - 1)));
  }
}

TEST_CASE("rist closed form") {
  CHECK(rist_rel_logindex(3, 3, 2) == 0);  // floor vanishes below 2^k
  CHECK(rist_rel_logindex(4, 8, 1) == 8);  // second branch at r = 2^{m-1}
  for (unsigned m = 1; m <= 8; ++m)
    for (unsigned k = 0; k + 1 <= m; ++k) {
      long prev = 0;
      for (unsigned long r = 1; r <= (1ul << m) - 1; ++r) {
        long f = rist_rel_logindex(m, r, k);
        long g = gamma_rel_logindex(m, r);
        CHECK((static_cast<long long>(f) << k) <= 2ll * g);  // f <= 2^{1-k} g
        CHECK(f >= prev);                                    // non-decreasing
        prev = f;
      }
    }
}

TEST_CASE("jennings closed form telescopes") {
  CHECK(d_rel_logindex(2, 1) == 1);
  CHECK(d_rel_logindex(2, 2) == 3);
  for (unsigned m = 1; m <= 10; ++m)
    CHECK(d_rel_logindex(m, (1ul << m) - 1) + 2 == nm_step_logdim(m));
}

TEST_CASE("V-space dimensions") {
  for (unsigned m = 1; m <= 6; ++m) {
    CHECK(vmr_dim(m, 0) == 1l << m);
    CHECK(vmr_dim(m, 1ul << m) == 0);
    for (unsigned long r = 1; r <= (1ul << m); ++r)
      CHECK(vmr_dim(m, r - 1) == vmr_dim(m, r) + 1);  // codimension one steps
  }
}

TEST_CASE("rist dimension sandwich") {
  for (unsigned k = 0; k <= 4; ++k) {
    RistDimReport rep = rist_hdim_wrt_gamma(k, 20);
    mpz_class den = mpz_class(1) << k;
    mpq_class target = mpq_class(1) / mpq_class(den);
    CHECK(rep.exact_limit == target);
    // agrees exactly with the tree measure of a level-k singleton
    Antichain singleton(2, {Vertex(2, std::vector<unsigned>(k, 0))});
    CHECK(rep.exact_limit == singleton.measure());
    CHECK(std::abs(rep.estimate - target.get_d()) <= 1e-6);
    // windows narrow towards the limit
    const auto& w = rep.windows;
    REQUIRE(w.size() >= 2);
    double last_dev =
        std::max(std::abs(w.back().ratio_min - target.get_d()), std::abs(w.back().ratio_max - target.get_d()));
    double first_dev =
        std::max(std::abs(w.front().ratio_min - target.get_d()), std::abs(w.front().ratio_max - target.get_d()));
    CHECK(last_dev <= first_dev);
    CHECK(last_dev < 1e-4);
  }
}

TEST_CASE("empirical crosscheck at a light level") {
  CrosscheckReport rep = empirical_crosscheck(1, 5);
  bool found_n1 = false;
  for (const auto& row : rep.rows)
    if (row.filtration == "N" && row.m == 1) {
      found_n1 = true;
      REQUIRE(row.empirical.has_value());
      CHECK(*row.empirical == 3);
      CHECK(row.stabilized);
    }
  CHECK(found_n1);
  CHECK(rep.gamma_equals_nm);
  REQUIRE(rep.g_to_n1_logindex.has_value());
  CHECK(*rep.g_to_n1_logindex == 5);  // regression: log2 |G : N_1|
  std::string csv = filt_csv(rep, 1);
  CHECK(csv.rfind("filtration,m,r,closed_form,empirical,stabilized\n", 0) == 0);
}
