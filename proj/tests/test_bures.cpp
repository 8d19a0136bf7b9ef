#include <doctest.h>

#include <cmath>
#include <random>
#include <tuple>

#include "lossmetro/bures.hpp"
#include "lossmetro/errors.hpp"
#include "lossmetro/loss_channel.hpp"
#include "lossmetro/metrology.hpp"

using namespace lossmetro;

namespace {

// Query whose channel pair has overlap mu (eta = 1, eta' = mu^2).
EcbQuery with_mu(double m, double n, int modes = 1) {
  EcbQuery q;
  q.eta = 1.0;
  q.eta_prime = m * m;
  q.energy = n;
  q.modes = modes;
  return q;
}

}  // namespace

TEST_CASE("mu") {
  CHECK(mu(0.3, 0.3) == doctest::Approx(1.0));
  CHECK(mu(1.0, 0.0) == 0.0);
  CHECK(std::abs(mu(0.9, 0.5) - (std::sqrt(0.45) + std::sqrt(0.05))) <= 1e-12);
  CHECK(mu(0.9, 0.5) == doctest::Approx(0.894427191));
  for (double a : {0.05, 0.3, 0.77})
    for (double b : {0.1, 0.5, 0.95}) {
      const double pa = LossParams::eta_to_phi(a), pb = LossParams::eta_to_phi(b);
      CHECK(std::abs(mu(a, b) - std::cos(pb - pa)) <= 1e-14);
    }
  CHECK_THROWS_AS(mu(1.1, 0.5), ValidationError);
}

TEST_CASE("closed-form minimum fidelity") {
  CHECK(min_fidelity_closed(2.0, 0.8) == doctest::Approx(0.64));
  // (1 - 0.5) * 0.5^1 + 0.5 * 0.5^2
  CHECK(min_fidelity_closed(1.5, 0.5) == doctest::Approx(0.375).epsilon(1e-15));
  for (double n : {0.0, 0.4, 3.0, 7.25}) CHECK(min_fidelity_closed(n, 1.0) == 1.0);
  CHECK(min_fidelity_closed(0.0, 0.3) == 1.0);
  for (double n : {0.3, 1.0, 2.7})
    for (double m : {0.2, 0.6, 0.9}) {
      const double f = min_fidelity_closed(n, m);
      CHECK(f <= std::pow(m, std::floor(n)) + 1e-15);
      CHECK(f >= std::pow(m, std::ceil(n)) - 1e-15);
    }
  CHECK_THROWS_AS(min_fidelity_closed(-1.0, 0.5), ValidationError);
}

TEST_CASE("brute-force minimum fidelity examples") {
  auto q = with_mu(0.5, 1.5);
  q.n_max = 30;
  const auto r = min_fidelity_bruteforce(q);
  CHECK(std::abs(r.value - 0.375) <= 1e-12);
  REQUIRE(r.support == std::vector<int>{1, 2});
  CHECK(r.weights[0] == doctest::Approx(0.5));
  CHECK(r.weights[1] == doctest::Approx(0.5));

  const auto zero = min_fidelity_bruteforce(with_mu(0.5, 0.0));
  CHECK(zero.value == 1.0);
  CHECK(zero.support == std::vector<int>{0});

  const auto orth = min_fidelity_bruteforce(with_mu(0.0, 0.5));
  CHECK(orth.value == doctest::Approx(0.5));
  CHECK(orth.support == std::vector<int>{0, 1});

  auto infeasible = with_mu(0.5, 4.5);
  infeasible.n_max = 4;
  CHECK_THROWS_AS(min_fidelity_bruteforce(infeasible), ValidationError);
}

TEST_CASE("ECB distance") {
  CHECK(ecb_distance(with_mu(1.0, 3.0)) == 0.0);
  CHECK(ecb_distance(with_mu(0.0, 1.0)) == doctest::Approx(1.0));
  CHECK(ecb_distance(with_mu(0.5, 1.5)) == doctest::Approx(std::sqrt(0.625)).epsilon(1e-12));
}

TEST_CASE("optimal probe") {
  const auto psi = ecb_optimal_probe(with_mu(0.5, 2.0, 2));
  CHECK(psi.layout().mode_count() == 2);
  CHECK(std::norm(psi.amplitude(std::vector<int>{2, 0})) == doctest::Approx(1.0));

  const auto frac = ecb_optimal_probe(with_mu(0.5, 1.5));
  CHECK(std::norm(frac.amplitude(std::vector<int>{0, 1})) == doctest::Approx(0.5));
  CHECK(std::norm(frac.amplitude(std::vector<int>{1, 2})) == doctest::Approx(0.5));

  EcbQuery q;
  q.eta = 0.9;
  q.eta_prime = 0.5;
  q.energy = 1.5;
  CHECK(std::abs(ecb_pipeline_fidelity(q) - min_fidelity_closed(1.5, mu(0.9, 0.5))) <= 1e-9);
  CHECK_THROWS_AS(ecb_optimal_probe(q, 1), CutoffTooSmall);
}

TEST_CASE("property: closed form equals the brute-force optimum") {
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j)
      for (double n : {0.3, 1.0, 1.5, 2.7, 5.0}) {
        EcbQuery q;
        q.eta = 0.05 + 0.1 * i;
        q.eta_prime = 0.05 + 0.1 * j;
        q.energy = n;
        const double closed = min_fidelity_closed(n, mu(q.eta, q.eta_prime));
        CHECK(std::abs(min_fidelity_bruteforce(q).value - closed) <= 1e-9);
      }
}

TEST_CASE("property: no distribution with the right mean goes below the closed form") {
  std::mt19937_64 rng(55);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int t = 0; t < 50; ++t) {
    const double n = 0.2 + 4.0 * u(rng);
    const double m = u(rng);
    const int top = 12;
    std::vector<double> p(top + 1);
    double mass = 0.0, mean = 0.0;
    for (int k = 0; k <= top; ++k) {
      p[k] = u(rng);
      mass += p[k];
    }
    for (int k = 0; k <= top; ++k) {
      p[k] /= mass;
      mean += k * p[k];
    }
    // Mix with a point mass at 0 or at `top` so the mean becomes n.
    if (mean > n) {
      const double s = n / mean;
      for (auto& x : p) x *= s;
      p[0] += 1.0 - s;
    } else {
      const double s = (top - n) / (top - mean);
      for (auto& x : p) x *= s;
      p[top] += 1.0 - s;
    }
    double check_mean = 0.0, f = 0.0;
    for (int k = 0; k <= top; ++k) {
      check_mean += k * p[k];
      f += p[k] * std::pow(m, k);
    }
    REQUIRE(check_mean == doctest::Approx(n).epsilon(1e-12));
    CHECK(f >= min_fidelity_closed(n, m) - 1e-12);
  }
}

TEST_CASE("property: the minimizer is unique at non-integer energy") {
  for (double m : {0.1, 0.5, 0.9, 0.99})
    for (double n : {0.3, 1.5, 2.7, 4.01}) {
      const auto r = min_fidelity_bruteforce(with_mu(m, n));
      const std::vector<int> want{static_cast<int>(std::floor(n)), static_cast<int>(std::ceil(n))};
      CHECK(r.support == want);
    }
}

TEST_CASE("property: minimum fidelity does not increase with energy") {
  for (double m : {0.0, 0.3, 0.8, 0.999}) {
    double last = 1.0;
    for (int i = 0; i <= 100; ++i) {
      const double f = min_fidelity_closed(0.07 * i, m);
      CHECK(f <= last + 1e-15);
      last = f;
    }
  }
}

TEST_CASE("property: the distance does not depend on the number of modes") {
  for (auto [a, b, n] : {std::tuple{0.9, 0.5, 1.5}, std::tuple{0.2, 0.7, 2.3}, std::tuple{0.6, 0.05, 0.4}}) {
    EcbQuery q;
    q.eta = a;
    q.eta_prime = b;
    q.energy = n;
    const double closed = min_fidelity_closed(n, mu(a, b));
    for (int modes : {1, 2, 4}) {
      q.modes = modes;
      CHECK(std::abs(ecb_pipeline_fidelity(q) - closed) <= 1e-9);
      CHECK(std::abs(ecb_distance(q) - ecb_distance(with_mu(mu(a, b), n))) <= 1e-12);
    }
  }
}
