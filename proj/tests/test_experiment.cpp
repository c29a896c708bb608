#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstring>
#include <random>

#include "calderon/experiment.hpp"

using namespace calderon;

TEST_CASE("log-log regression") {
  SECTION("exact power law") {
    std::vector<std::pair<double, double>> pairs;
    for (int j = 0; j < 10; ++j) {
      double K = std::pow(1.5, j);
      pairs.push_back({K, 2.0 * std::pow(K, 0.3)});
    }
    Regression r = fit_loglog(pairs);
    CHECK(r.mu == Catch::Approx(0.3).epsilon(1e-12));
    CHECK(r.intercept == Catch::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(r.r_squared == Catch::Approx(1.0).epsilon(1e-12));
  }

  SECTION("constant values give zero slope") {
    Regression r = fit_loglog({{1.0, 4.2}, {2.0, 4.2}, {4.0, 4.2}});
    CHECK(r.mu == Catch::Approx(0.0).margin(1e-14));
  }

  SECTION("noisy data matches an independent closed-form least squares") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> noise(0.9, 1.1);
    std::vector<std::pair<double, double>> pairs;
    for (int j = 0; j < 10; ++j) {
      double K = std::pow(1.5, j);
      pairs.push_back({K, 3.0 * std::pow(K, 0.11) * noise(rng)});
    }
    Regression r = fit_loglog(pairs);
    // independent route: raw normal equations via determinant
    long double n = 0, sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto& [K, v] : pairs) {
      long double x = std::log((long double)K), y = std::log((long double)v);
      n += 1;
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
    }
    long double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    CHECK(r.mu == Catch::Approx((double)slope).epsilon(1e-12));
  }

  SECTION("rejects degenerate input") {
    CHECK_THROWS_AS(fit_loglog({{1.0, 2.0}}), std::invalid_argument);
    CHECK_THROWS_AS(fit_loglog({{1.0, 2.0}, {2.0, -1.0}}), std::invalid_argument);
  }
}

TEST_CASE("unit-contrast control sweep: interface invisible") {
  SweepSettings s;
  s.family = InterfaceKind::parabolic;
  s.eta = 1.0;
  s.mesh_level = 1;
  s.cg_tol = 1e-12;  // the control asserts mu = 0 below the solver noise
  SweepRecord rec = run_sweep(s);
  for (double mg : rec.max_grads)
    CHECK(mg == Catch::Approx(std::sqrt(13.0)).margin(1e-7));
  CHECK(std::abs(rec.regression.mu) <= 1e-8);
}

TEST_CASE("reference-default sweeps at level 1: tolerance bands and monotonicity") {
  SweepSettings s;
  s.mesh_level = 1;
  s.threads = 2;

  // level 1 wobbles up to ~2% around K = 2.25; the default level used
  // by the acceptance suite (2) holds the 1% band
  s.family = InterfaceKind::parabolic;
  SweepRecord par = run_sweep(s);
  INFO("mu_parabola(level 1) = " << par.regression.mu);
  CHECK(par.regression.mu == Catch::Approx(0.027).margin(0.05));
  CHECK(nondecreasing_within(par.max_grads, 0.02));

  s.family = InterfaceKind::hyperbolic;
  SweepRecord hyp = run_sweep(s);
  INFO("mu_hyperbola(level 1) = " << hyp.regression.mu);
  CHECK(hyp.regression.mu == Catch::Approx(0.1099).margin(0.05));
  CHECK(nondecreasing_within(hyp.max_grads, 0.01));

  // record invariants
  CHECK(par.K_values.size() == par.max_grads.size());
  for (std::size_t i = 1; i < par.K_values.size(); ++i)
    CHECK(par.K_values[i] > par.K_values[i - 1]);

  // regression recomputable from the stored pairs bit-for-bit
  Regression refit = fit_loglog(par.pairs());
  CHECK(std::memcmp(&refit.mu, &par.regression.mu, sizeof(double)) == 0);
  CHECK(std::memcmp(&refit.intercept, &par.regression.intercept, sizeof(double)) == 0);

  // threaded and sequential sweeps agree bitwise
  s.family = InterfaceKind::parabolic;
  s.threads = 1;
  SweepRecord seq = run_sweep(s);
  for (std::size_t i = 0; i < seq.max_grads.size(); ++i)
    CHECK(std::memcmp(&seq.max_grads[i], &par.max_grads[i], sizeof(double)) == 0);
}

TEST_CASE("sweep rejects bad input") {
  SweepSettings s;
  s.K_values = {2.0, 1.0};
  CHECK_THROWS_AS(run_sweep(s), std::invalid_argument);
  SweepSettings c;
  c.family = InterfaceKind::circular;
  CHECK_THROWS_AS(run_sweep(c), std::invalid_argument);
}

TEST_CASE("circle convergence study") {
  SECTION("eta = 2: rates against the analytic oracle") {
    auto rows = convergence_study(1.0, 2.0, 3);
    REQUIRE(rows.size() == 3);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      INFO("level " << rows[i].level << " l2 " << rows[i].l2_error << " rate "
                    << rows[i].l2_rate << " energy rate " << rows[i].energy_rate);
      CHECK(rows[i].l2_rate >= 1.8);
      CHECK(rows[i].energy_rate >= 0.9);
      // halving h shrinks the energy error by about 2x
      double ratio = rows[i - 1].energy_error / rows[i].energy_error;
      CHECK(ratio >= 1.7);
      CHECK(ratio <= 2.3);
    }
    CHECK(rows.back().l2_error < 1e-2);
  }

  SECTION("eta = 1: errors at the floor, rates saturated") {
    auto rows = convergence_study(1.0, 1.0, 3);
    for (const auto& row : rows) {
      CHECK(row.l2_error < 1e-10);
      CHECK(row.saturated);
    }
  }

  SECTION("precondition") {
    CHECK_THROWS_AS(convergence_study(1.0, 2.0, 2), std::invalid_argument);
  }
}

TEST_CASE("galerkin energy bound: discrete energy below the interpolated oracle energy") {
  CircleOracle oracle = circle_exact_solution(1.0, 2.0, {1.0, 0.0});
  InterfaceSpec spec = InterfaceSpec::circle(1.0);
  auto mesh = std::make_shared<Mesh>(generate_mesh(spec, 16, 12, 1.3));
  for (int level = 0; level < 2; ++level) {
    if (level > 0) mesh = std::make_shared<Mesh>(refine_mesh(*mesh, spec));
    FemSolution sol = solve_dirichlet_problem(
        mesh, 2.0, [&](Vec2 p) { return oracle.u_exterior(p); }, 1e-12, 400000);
    std::vector<double> interp(mesh->n_vertices());
    for (int v = 0; v < mesh->n_vertices(); ++v) interp[v] = oracle.u(mesh->vertices[v]);
    FemSolution proxy = sol;
    proxy.u = interp;
    proxy.gradients = gradient_field(*mesh, interp);
    CHECK(solution_energy(sol) <= solution_energy(proxy) + 1e-10);
  }
}

TEST_CASE("two-inclusion comparison on the bottom segment") {
  InterfaceSpec cap = InterfaceSpec::cap_inclusion(1.0, 2.0, {0.0, -1.0});
  auto flux = [](Vec2 p) { return std::sin(2.0 * M_PI * (p.x + 5.0) / 10.0); };
  std::vector<BoundaryMarker> gamma0 = {BoundaryMarker::bottom};

  CompareResult same = compare_inclusions(cap, cap, 2.0, 2.0, flux, gamma0);
  INFO("identical-spec noise floor " << same.l2_diff);
  CHECK(same.l2_diff <= 1e-9);

  CompareResult contrast = compare_inclusions(cap, cap, 2.0, 3.0, flux, gamma0);
  CHECK(contrast.l2_diff > 100.0 * std::max(same.l2_diff, 1e-12));

  InterfaceSpec moved = InterfaceSpec::cap_inclusion(1.0, 2.0, {0.5, -1.0});
  CompareResult translated = compare_inclusions(cap, moved, 2.0, 2.0, flux, gamma0);
  INFO("translated diff " << translated.l2_diff);
  CHECK(translated.l2_diff >= 10.0 * std::max(same.l2_diff, 1e-12));

  InterfaceSpec outside = InterfaceSpec::cap_inclusion(1.0, 2.0, {4.5, -1.0});
  CHECK_THROWS_AS(compare_inclusions(cap, outside, 2.0, 2.0, flux, gamma0),
                  std::invalid_argument);
}

TEST_CASE("sweep csv: schema and determinism") {
  SweepSettings s;
  s.mesh_level = 1;
  s.K_values = {1.0, 1.5, 2.25};
  s.eta = 1.0;
  SweepRecord rec = run_sweep(s);
  std::string csv = sweep_csv(rec);
  CHECK(csv.rfind("family,K,mesh_level,n_vertices,n_triangles,max_grad,solve_iters,runtime_ms\n",
                  0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 4);
  std::string summary = sweep_summary_csv_row(rec);
  CHECK(summary.rfind("parabolic,", 0) == 0);
}
