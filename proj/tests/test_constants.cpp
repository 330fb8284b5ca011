#include <catch2/catch_amalgamated.hpp>

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <cmath>
#include <random>

#include "cmcgraph/constants.hpp"

using namespace cmc;
using mp50 = boost::multiprecision::cpp_bin_float_50;

namespace {

// 32-digit reference for the root of x = cosh(x/sqrt(x^2-1)), frozen from an
// independent high-precision computation.
const mp50 kDelta50("1.8101705806989772745128292123964");

// Independent bisection oracle on x - cosh(x/sqrt(x^2-1)).
double bisect_delta_oracle() {
  auto g = [](double x) { return x - std::cosh(x / std::sqrt(x * x - 1.0)); };
  double lo = 1.5, hi = 2.5;
  for (int i = 0; i < 200 && hi - lo > 1e-15; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < 0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace

TEST_CASE("acosh log form") {
  CHECK(acosh_log(1.0) == 0.0);
  CHECK(acosh_log(1.0 - 1e-14) == 0.0);  // rounding absorbed
  CHECK(acosh_log(2.0) == Catch::Approx(std::acosh(2.0)).epsilon(1e-15));
  CHECK_THROWS_AS(acosh_log(0.5), math_error);
}

TEST_CASE("delta root") {
  const DeltaConstant d = solve_delta();
  CHECK(std::abs(d.value - 1.8102) <= 1e-3);
  CHECK(d.residual <= 1e-12);
  CHECK(d.value > 1.8);
  CHECK(d.value < 1.82);

  SECTION("agrees with the bisection oracle") {
    CHECK(std::abs(d.value - bisect_delta_oracle()) <= 1e-10);
  }

  SECTION("agrees with the 50-digit evaluation") {
    const mp50 d50 = delta_root<mp50>(mp50("1e-45"));
    CHECK(abs(d50 - kDelta50) < mp50("1e-30"));
    CHECK(std::abs(d.value - d50.convert_to<double>()) <= 1e-15);
  }

  SECTION("stationary point of acosh(t)/t") {
    auto f = [](double t) { return std::acosh(t) / t; };
    const double h = 1e-5;
    const double fp = (f(d.value + h) - f(d.value - h)) / (2 * h);
    CHECK(std::abs(fp) <= 1e-8);
    // and a maximum: strictly below the value nearby
    CHECK(f(d.value) > f(d.value - 0.05));
    CHECK(f(d.value) > f(d.value + 0.05));
  }
}

TEST_CASE("minimal height bound") {
  const double del = delta();

  SECTION("interior branch: cosh^-1 argument collapses to delta") {
    const auto mh = minimal_height_bound(2, 1.0, 10.0);
    CHECK(mh.tau == Catch::Approx((del - 1) / del).epsilon(1e-15));
    CHECK(std::abs(mh.h_max - 0.6627434193491816) <= 1e-12);
    CHECK_FALSE(mh.degenerate);
    // cross-check against the 50-digit route
    const mp50 d50 = delta_root<mp50>(mp50("1e-45"));
    const mp50 h50 = acosh_log(d50) / d50;
    CHECK(std::abs(mh.h_max - h50.convert_to<double>()) <= 1e-15);
  }

  SECTION("reach branch") {
    const auto mh = minimal_height_bound(2, 1.0, 0.1);
    CHECK(mh.tau == 0.1);
    CHECK(std::abs(mh.h_max - 0.3275753311390815) <= 1e-12);
  }

  SECTION("degenerate mean-convex input is flagged") {
    const auto mh = minimal_height_bound(2, 0.0, 2.5);
    CHECK(mh.degenerate);
    CHECK(mh.h_max == 2.5);
    CHECK(mh.tau == 2.5);
  }

  SECTION("monotone in reach, antitone in curvature and dimension") {
    std::mt19937 rng(42);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const double mu0 = std::pow(10.0, -1 + 2 * uni(rng));
      const double reach = std::pow(10.0, -1 + 2 * uni(rng));
      const int n = 2 + static_cast<int>(uni(rng) * 4);
      const double h0 = minimal_height_bound(n, mu0, reach).h_max;
      CHECK(minimal_height_bound(n, mu0, reach * 1.5).h_max >= h0 - 1e-15);
      CHECK(minimal_height_bound(n, mu0 * 1.5, reach).h_max <= h0 + 1e-15);
      CHECK(minimal_height_bound(n + 1, mu0, reach).h_max <= h0 + 1e-15);
    }
  }
}

TEST_CASE("cmc constant C") {
  const double del = delta();

  SECTION("digit check on the positivity margin") {
    CHECK(std::abs(del * (1 + del) - 5.087) <= 1e-3);
    CHECK(std::abs(2 * acosh_log(del) - 2.3994) <= 1e-3);
    for (int n = 2; n <= 6; ++n)
      CHECK(n * del * (1 + del) - 2 * acosh_log(del) > 5.087 - 2.3994 - 2e-3);
  }

  SECTION("0 < C < 1/radius_bound over a randomized grid") {
    std::mt19937 rng(1234);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 500; ++k) {
      const int n = 2 + static_cast<int>(uni(rng) * 5);
      const double mu = std::pow(10.0, -2 + 4 * uni(rng));
      const double RB = std::pow(10.0, -2 + 4 * uni(rng));
      const double reach = std::min(RB, std::pow(10.0, -3 + 4 * uni(rng)));
      const auto cc = cmc_constant_C(n, mu, RB, reach);
      CHECK(cc.C > 0);
      CHECK(cc.C < 1.0 / RB);
      CHECK(cc.sigma > 0);
      CHECK(cc.sigma <= reach);
    }
  }

  SECTION("matches the 50-digit evaluation on the reference annulus") {
    const auto cc = cmc_constant_C(2, 1.0, 2.0, 1.0);
    CHECK(std::abs(cc.sigma - 0.11746609921779687) <= 1e-15);
    const mp50 d50 = delta_root<mp50>(mp50("1e-45"));
    const mp50 s50 = cmc_sigma(2, mp50(1), mp50(2), mp50(1), d50);
    const mp50 C50 = cmc_C(2, mp50(1), mp50(2), s50, d50);
    CHECK(std::abs(cc.C - C50.convert_to<double>()) <=
          4e-16 * C50.convert_to<double>());
    CHECK(std::abs(cc.C - 0.012990067214071562) <= 1e-15);
  }

  SECTION("the two algebraic forms of sigma agree") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const int n = 2 + static_cast<int>(uni(rng) * 4);
      const double mu = std::pow(10.0, -2 + 4 * uni(rng));
      const double RB = std::pow(10.0, -2 + 4 * uni(rng));
      const double reach = std::pow(10.0, -3 + 4 * uni(rng));
      const double s1 = cmc_sigma(n, mu, RB, reach, del);
      const double s2 =
          std::min(reach, RB * (del - 1) / (del * (RB * mu + n * (del + 1))));
      CHECK(std::abs(s1 - s2) <= 4e-16 * std::max(s1, s2));
    }
  }

  SECTION("degenerate mu") {
    CHECK_THROWS_AS(cmc_constant_C(2, 0.0, 2.0, 1.0), degenerate_error);
  }
}

TEST_CASE("cmc height bound") {
  const double del = delta();
  const auto cc = cmc_constant_C(2, 1.0, 2.0, 1.0);

  SECTION("H = 0 collapses to the sigma variant of the minimal formula") {
    const double h0 = cmc_height_bound(2, 1.0, 0.0, 2.0, 1.0);
    CHECK(h0 == Catch::Approx(height_gain(1.0, cc.sigma, del)).epsilon(1e-15));
    CHECK(std::abs(h0 - 0.35416007148795803) <= 1e-12);
  }

  SECTION("positive on [0, C)") {
    for (double frac : {0.1, 0.5, 0.9, 0.99, 0.9999})
      CHECK(cmc_height_bound(2, 1.0, frac * cc.C, 2.0, 1.0) > 0);
  }

  SECTION("positive over a randomized parameter grid") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 300; ++k) {
      const int n = 2 + static_cast<int>(uni(rng) * 4);
      const double mu = std::pow(10.0, -2 + 4 * uni(rng));
      const double RB = std::pow(10.0, -2 + 4 * uni(rng));
      const double reach = std::min(RB, std::pow(10.0, -3 + 4 * uni(rng)));
      const double C = cmc_constant_C(n, mu, RB, reach).C;
      for (double frac : {1e-3, 0.33, 0.85, 0.999})
        CHECK(cmc_height_bound(n, mu, frac * C, RB, reach) > 0);
    }
  }

  SECTION("rho form bounds the sigma form from above") {
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const int n = 2 + static_cast<int>(uni(rng) * 3);
      const double mu = std::pow(10.0, -1 + 2 * uni(rng));
      const double RB = std::pow(10.0, -1 + 2 * uni(rng));
      const double reach = std::min(RB, std::pow(10.0, -2 + 2 * uni(rng)));
      const auto c = cmc_constant_C(n, mu, RB, reach);
      const double H = 0.7 * c.C * uni(rng);
      const double hh = cmc_height_bound(n, mu, H, RB, reach);
      const double rho = rho_width(n, mu, H, reach);
      const double hr = H * RB;
      const double rho_form = height_gain(mu + n * H * (1 + delta()), rho, delta()) -
                              H * RB * RB / (1 + std::sqrt(1 - hr * hr));
      CHECK(hh <= rho_form + 1e-14);
    }
  }

  SECTION("H at or above C is rejected, naming C") {
    try {
      cmc_height_bound(2, 1.0, cc.C, 2.0, 1.0);
      FAIL("expected math_error");
    } catch (const math_error& e) {
      CHECK(std::string(e.what()).find(format_g17(cc.C)) != std::string::npos);
    }
  }
}

TEST_CASE("comparison bound") {
  SECTION("forced 1/(2B) branch") {
    const auto a = ars_comparison_bound(2, 1.0, 10.0);
    CHECK(a.B == Catch::Approx(66.0).epsilon(1e-15));
    CHECK(a.eps_bar == Catch::Approx(1.0 / 132.0).epsilon(1e-15));
    CHECK(a.bound == Catch::Approx(std::log(1.5) / 66.0).epsilon(1e-14));
    CHECK_FALSE(a.r_prime_branch);
  }

  SECTION("forced r_prime branch") {
    const auto a = ars_comparison_bound(2, 1.0, 1e-3);
    CHECK(a.r_prime_branch);
    CHECK(a.eps_bar == 1e-3);
    CHECK(a.bound == Catch::Approx(std::log1p(a.B * 1e-3) / a.B).epsilon(1e-14));
  }

  SECTION("the collar bound beats the log bound in its favorable regime") {
    const double del = delta();
    const double reach = 50.0;
    for (double mu : {0.5, 1.0, 2.0, 4.0})
      for (double rp : {1.0, 2.0, 5.0, 10.0}) {
        // regime: 1/(2B) < r' and (delta-1)/(delta mu) < R
        const double B = 6.0 * (1.0 + rp) * mu;
        REQUIRE(1.0 / (2.0 * B) < rp);
        REQUIRE((del - 1) / (del * mu) < reach);
        const double h_max = minimal_height_bound(2, mu, reach).h_max;
        const double ars = ars_comparison_bound(2, mu, rp).bound;
        CHECK(h_max > ars);
      }
  }
}

TEST_CASE("aggregate bounds report") {
  const auto r = compute_bounds(2, 1.0, 0.005, 1.0, 2.0, 0.5);
  CHECK(r.mu == 1.0);
  CHECK(r.delta == delta());
  CHECK(r.sigma <= r.rho);
  CHECK(r.rho <= r.tau);
  CHECK(r.h_H > 0);
  CHECK(r.h_max_minimal > r.h_H);  // sigma <= tau and the cap term only cuts
  CHECK(r.epsilon <= r.rho);
  CHECK(r.C == cmc_constant_C(2, 1.0, 2.0, 1.0).C);

  SECTION("sigma <= rho <= tau whenever H <= 1/radius_bound") {
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int k = 0; k < 200; ++k) {
      const int n = 2 + static_cast<int>(uni(rng) * 3);
      const double hi = std::pow(10.0, -1 + 2 * uni(rng));
      const double RB = std::pow(10.0, -1 + 2 * uni(rng));
      const double reach = std::min(RB, std::pow(10.0, -2 + 2 * uni(rng)));
      const double C = cmc_constant_C(n, (n - 1) * hi, RB, reach).C;
      const auto rep = compute_bounds(n, hi, 0.9 * C, reach, RB, 0.5 * reach);
      CHECK(rep.sigma <= rep.rho + 1e-15);
      CHECK(rep.rho <= rep.tau + 1e-15);
    }
  }
}
