// Acceptance suite: one PASS/FAIL line per criterion.

#include <sys/wait.h>
#include <unistd.h>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "cgw/cgw.hpp"

#include "oracles.hpp"

using namespace cgw;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(double x, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << x;
  return os.str();
}

using ExactLaw = std::map<std::vector<std::int64_t>, double>;

/// Conditional law of CGW(n) by brute force over excursions.
ExactLaw exact_conditional(int n, const std::function<double(std::int64_t)>& p) {
  ExactLaw out;
  double total = 0.0;
  for (const auto& xi : oracle::all_excursions(n)) {
    double w = 1.0;
    for (auto x : xi) w *= p(x);
    if (w > 0.0) out[xi] = w;
    total += w;
  }
  for (auto& [xi, w] : out) w /= total;
  return out;
}

// ---------------------------------------------------------------- 1

Outcome bijection() {
  std::ostringstream d;
  bool ok = true;
  std::size_t trees = 0, excursions = 0;
  for (int n = 1; n <= 10; ++n) {
    for (const auto& w : enumerate_trees(OffspringLaw::geometric(), n)) {
      ++trees;
      if (!(decode_path(encode_tree(w.tree)) == w.tree)) ok = false;
    }
    for (const auto& xi : oracle::all_excursions(n)) {
      ++excursions;
      const LatticePath path = LatticePath::from_offspring(xi);
      if (!(encode_tree(decode_path(path)).values() == path.values())) ok = false;
    }
  }
  const auto motzkin = oracle::motzkin(7);
  const std::vector<std::uint64_t> listed{1, 1, 2, 4, 9, 21, 51};
  if (motzkin != listed) ok = false;
  std::vector<std::uint64_t> counts;
  for (int n = 1; n <= 7; ++n) counts.push_back(enumerate_trees(OffspringLaw::table({0.25, 0.5, 0.25}), n).size());
  if (counts != motzkin) ok = false;
  d << trees << " trees, " << excursions << " excursions round-tripped; degree<=2 counts";
  for (auto c : counts) d << ' ' << c;
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 2

Outcome dwass() {
  const std::vector<std::pair<OffspringLaw, std::function<double(std::int64_t)>>> laws{
      {OffspringLaw::geometric(), [](std::int64_t x) { return std::ldexp(1.0, -static_cast<int>(x) - 1); }},
      {OffspringLaw::poisson(), [](std::int64_t x) { return std::exp(-1.0 - std::lgamma(x + 1.0)); }},
      {OffspringLaw::binary(), [](std::int64_t x) { return x == 0 || x == 2 ? 0.5 : 0.0; }}};
  double worst = 0.0;
  for (const auto& [law, p] : laws) {
    for (int n = 1; n <= 8; ++n) worst = std::max(worst, std::abs(total_size_pmf(law, n) - oracle::enumerated_total(n, p)));
  }
  return {worst < 1e-12, "max |diff| = " + fmt(worst)};
}

// ---------------------------------------------------------------- 3

Outcome sampler_exactness() {
  const int draws = 100000;
  const int n = 5;
  std::ostringstream d;
  bool ok = true;
  double worst = 0.0;
  const std::vector<OffspringLaw> laws{OffspringLaw::geometric(), OffspringLaw::poisson(), OffspringLaw::binary(),
                                       OffspringLaw::zeta(1.5), OffspringLaw::table({0.3, 0.5, 0.1, 0.1})};
  for (const auto& law : laws) {
    const auto exact = exact_conditional(n, [&](std::int64_t x) { return law.pmf(x); });
    for (auto s : applicable_strategies(law)) {
      const ConditionedSampler sampler(law, n, s);
      Rng rng = RngStream(3000 + static_cast<std::uint64_t>(law.kind()), static_cast<std::uint64_t>(s)).engine();
      std::map<std::vector<std::int64_t>, std::uint64_t> counts;
      for (int i = 0; i < draws; ++i) ++counts[sampler.sample_tree(rng).offspring()];
      ExactLaw empirical;
      for (const auto& [xi, c] : counts) empirical[xi] = static_cast<double>(c) / draws;
      const double tv = tv_discrete(empirical, exact);
      worst = std::max(worst, tv);
      if (!(tv < 0.015)) {
        ok = false;
        d << law.name() << '/' << strategy_name(s) << " tv=" << fmt(tv) << "; ";
      }
    }
  }
  d << "max TV = " << fmt(worst);
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 4

Outcome lamperti_identity() {
  double worst_c = 0.0, worst_h = 0.0, worst_int = 0.0;
  const std::vector<std::pair<OffspringLaw, std::int64_t>> laws{{OffspringLaw::geometric(), 1000},
                                                                {OffspringLaw::poisson(), 1000},
                                                                {OffspringLaw::binary(), 1001},
                                                                {OffspringLaw::zeta(1.5), 1000}};
  for (const auto& [law, n] : laws) {
    const ConditionedSampler sampler(law, n, default_strategy(law));
    for (std::uint64_t r = 0; r < 100; ++r) {
      Rng rng = RngStream(4000 + static_cast<std::uint64_t>(law.kind()), r).engine();
      const auto triple = profile_triple(sampler.sample_tree(rng), law);
      worst_c = std::max(worst_c, max_deviation(time_change(triple.excursion), triple.cumulative));
      worst_h = std::max(worst_h, max_deviation(height_transform(triple.excursion), triple.height_profile));
      worst_int = std::max(worst_int, std::abs(triple.height_profile.integral() - 1.0));
    }
  }
  return {worst_c < 1e-9 && worst_h < 1e-9 && worst_int < 1e-12,
          "max dev C " + fmt(worst_c) + ", H " + fmt(worst_h) + ", |int H - 1| " + fmt(worst_int)};
}

// ---------------------------------------------------------------- 5

Outcome cycle_lemma() {
  Rng rng = RngStream(5000, 0).engine();
  int bad = 0;
  for (int rep = 0; rep < 10000; ++rep) {
    const std::int64_t n = 2 + static_cast<std::int64_t>(rng() % 49);
    // a skip-free bridge: increments xi - 1 with sum(xi) = n - 1
    std::vector<std::int64_t> xi;
    std::geometric_distribution<std::int64_t> geo(0.5);
    for (;;) {
      xi.assign(static_cast<std::size_t>(n), 0);
      std::int64_t sum = 0;
      for (auto& x : xi) sum += (x = geo(rng));
      if (sum == n - 1) break;
    }
    int excursions = 0;
    std::vector<std::int64_t> found;
    for (std::int64_t r = 0; r < n; ++r) {
      std::vector<std::int64_t> rot(xi.begin() + r, xi.end());
      rot.insert(rot.end(), xi.begin(), xi.begin() + r);
      std::int64_t s = 1;
      bool positive = true;
      for (std::size_t j = 0; j + 1 < rot.size(); ++j) positive = positive && (s += rot[j] - 1) > 0;
      if (positive) {
        ++excursions;
        found = rot;
      }
    }
    const auto rotated = rotate_to_excursion(LatticePath::from_offspring(xi));
    if (excursions != 1 || rotated.offspring() != found || !rotated.is_excursion()) ++bad;
  }
  return {bad == 0, "10000 bridges, " + std::to_string(bad) + " mismatches"};
}

// ---------------------------------------------------------------- 6

Outcome local_limit() {
  std::ostringstream d;
  bool ok = true;
  for (const auto& law : {OffspringLaw::geometric(), OffspringLaw::poisson()}) {
    const auto big = local_limit_check(law, 10000);
    const auto small = local_limit_check(law, 100);
    ok = ok && big.max_deviation <= 0.01 * big.density_at_zero && big.max_deviation < small.max_deviation;
    d << law.name() << ": " << fmt(small.max_deviation) << " (n=100) -> " << fmt(big.max_deviation)
      << " (n=1e4), bound " << fmt(0.01 * big.density_at_zero) << "; ";
  }
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 7

Outcome size_bias() {
  // Geometric(1/2) tilted by 1/2 is q_x = (3/4)(1/4)^x, mean 1/3; every
  // (tree, mark) pair has probability (1 - mu) prod q_xi.
  const double lambda = 0.5;
  auto q = [](std::int64_t x) { return 0.75 * std::pow(0.25, static_cast<double>(x)); };
  const double mu = 1.0 / 3.0;
  const auto tilted = tilt(OffspringLaw::geometric(), lambda);
  std::ostringstream d;
  bool ok = std::abs(tilted.mu() - mu) < 1e-15;
  double worst = 0.0;
  std::map<std::pair<std::vector<std::int64_t>, std::size_t>, double> exact;
  double covered = 0.0;
  for (int n = 1; n <= 6; ++n) {
    double sum = 0.0, q_size = 0.0;
    for (const auto& xi : oracle::all_excursions(n)) {
      double w = 1.0;
      for (auto x : xi) w *= q(x);
      q_size += w;
      const auto tree = OrderedTree::from_offspring(xi);
      for (std::size_t m = 0; m < tree.size(); ++m) {
        const double p = exact_prob_size_biased(tilted, tree, m);
        sum += p;
        if (n <= 5) {
          exact[{xi, m}] = (1.0 - mu) * w;
          covered += (1.0 - mu) * w;
          worst = std::max(worst, std::abs(p - (1.0 - mu) * w));
        }
      }
    }
    worst = std::max(worst, std::abs(sum - (1.0 - mu) * n * q_size));
  }
  ok = ok && worst < 1e-12;
  exact[{{}, 0}] = 1.0 - covered;  // everything larger, lumped

  const int draws = 1000000;
  std::map<std::pair<std::vector<std::int64_t>, std::size_t>, double> empirical;
  Rng rng = RngStream(7000, 0).engine();
  for (int i = 0; i < draws; ++i) {
    const auto s = sample_size_biased(tilted, rng);
    if (s.tree.size() <= 5) {
      empirical[{s.tree.offspring(), s.mark}] += 1.0 / draws;
    } else {
      empirical[{{}, 0}] += 1.0 / draws;
    }
  }
  const double tv = tv_discrete(empirical, exact);
  ok = ok && tv < 0.01;
  d << "max |exact - oracle| = " << fmt(worst) << ", TV(empirical, exact) over " << exact.size()
    << " cells = " << fmt(tv);
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 8

/// Exact TV between truncate(CGW(n), 3) and the cut size-biased tree for
/// the geometric law, by direct summation over (z_1, z_2, z_3).
double exact_spine_tv(std::int64_t n, double* q_mass) {
  const double size_n = oracle::negbin(n, n - 1) / static_cast<double>(n);
  auto forest = [](std::int64_t k, std::int64_t m) {
    if (k == 0) return m == 0 ? 1.0 : 0.0;
    if (m < k) return 0.0;
    return static_cast<double>(k) / static_cast<double>(m) * oracle::negbin(m, m - k);
  };
  double tv = 0.0, mass = 0.0;
  for (std::int64_t z1 = 0; z1 <= 80; ++z1) {
    const double w1 = std::ldexp(1.0, -static_cast<int>(z1) - 1);
    for (std::int64_t z2 = 0;; ++z2) {
      const double w2 = w1 * oracle::negbin(z1, z2);
      if (z2 > 4 * z1 + 40 && w2 < 1e-22) break;
      if (z1 == 0 && z2 > 0) break;
      for (std::int64_t z3 = 0;; ++z3) {
        const double w3 = w2 * oracle::negbin(z2, z3);
        if ((z3 > 4 * z2 + 40 && w3 * static_cast<double>(z3) < 1e-22) || (z2 == 0 && z3 > 0)) break;
        const double q = static_cast<double>(z3) * w3;
        const std::int64_t rest = n - 1 - z1 - z2;
        const double p = rest < 0 ? 0.0 : w3 * forest(z3, rest) / size_n;
        mass += q;
        tv += std::max(0.0, q - p);
      }
    }
  }
  *q_mass = mass;
  return tv;
}

Outcome spine_trend() {
  const auto law = OffspringLaw::geometric();
  const int samples = 10000;
  std::ostringstream d;
  std::vector<double> estimates;
  for (std::int64_t n : {200, 1000, 5000}) {
    const ConditionedSampler sampler(law, n, default_strategy(law));
    std::vector<double> under_p, under_q;
    std::vector<std::vector<std::int64_t>> zp, zq;
    for (int i = 0; i < samples; ++i) {
      Rng rp = RngStream(8000 + static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(i)).engine();
      auto z = generation_sizes(truncate(sampler.sample_tree(rp), 3));
      z.resize(4, 0);
      under_p.push_back(spine_likelihood_ratio(law, n, z));
      zp.push_back(std::move(z));
      Rng rq = RngStream(8100 + static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(i)).engine();
      auto w = generation_sizes(sample_spine_truncated(law, 3, rq));
      w.resize(4, 0);
      under_q.push_back(spine_likelihood_ratio(law, n, w));
      zq.push_back(std::move(w));
    }
    const double estimate = tv_likelihood_ratio(under_p, under_q);
    const double plug_in = tv_discrete(empirical_pmf(zp), empirical_pmf(zq));
    double covered = 0.0;
    const double exact = exact_spine_tv(n, &covered);
    estimates.push_back(estimate);
    d << "n=" << n << " TV=" << fmt(estimate) << " (exact " << fmt(exact) << ", plug-in " << fmt(plug_in)
      << "); ";
  }
  const bool ok = estimates[0] > estimates[1] && estimates[1] > estimates[2] && estimates[2] < 0.1;
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 9

EmpiricalSample height_profile_sample(const OffspringLaw& law, std::int64_t n, std::uint64_t seed) {
  ExperimentSpec spec;
  spec.law = law;
  spec.n = n;
  spec.samples = 5000;
  spec.statistic = "H_at_u";
  spec.u = 1.0;
  spec.seed = seed;
  return run(spec).sample;
}

Outcome self_consistency() {
  std::ostringstream d;
  bool ok = true;
  const double threshold = ks_threshold(5000, 5000, 0.01);
  auto compare = [&](const std::string& label, const EmpiricalSample& a, const EmpiricalSample& b) {
    const double ks = ks_distance(a, b);
    ok = ok && ks < threshold;
    d << label << " ks=" << fmt(ks) << "; ";
  };
  std::uint64_t seed = 9001;
  for (const auto& law : {OffspringLaw::geometric(), OffspringLaw::poisson(), OffspringLaw::zeta(1.5)}) {
    const auto small = height_profile_sample(law, 2000, seed++);
    const auto large = height_profile_sample(law, 8000, seed++);
    compare(law.name() + " 2000 vs 8000", small, large);
  }
  const auto geometric = height_profile_sample(OffspringLaw::geometric(), 8000, seed++);
  const auto poisson = height_profile_sample(OffspringLaw::poisson(), 8000, seed++);
  compare("geometric vs poisson at 8000", geometric, poisson);
  d << "threshold " << fmt(threshold);
  return {ok, d.str()};
}

// ---------------------------------------------------------------- 10

Outcome brownian() {
  ExperimentSpec lattice;
  lattice.law = OffspringLaw::geometric();
  lattice.n = 8000;
  lattice.samples = 2000;
  lattice.statistic = "max_h";
  lattice.source = Source::Lattice;
  lattice.seed = 10001;
  ExperimentSpec bessel = lattice;
  bessel.source = Source::Bessel;
  bessel.seed = 10002;
  const double ks = ks_distance(run(lattice).sample, run(bessel).sample);
  return {ks < 0.05, "ks=" + fmt(ks)};
}

// ---------------------------------------------------------------- 11

Outcome height_tail() {
  double worst = 0.0;
  const auto geo = OffspringLaw::geometric();
  for (int k = 0; k <= 20; ++k) worst = std::max(worst, std::abs(height_survival(geo, k) - 1.0 / (k + 2.0)));
  const auto rungs = height_tail_check(OffspringLaw::poisson(), decade_ladder(2, 6));
  const double last = rungs.back().ratio, prev = rungs[rungs.size() - 2].ratio;
  const double change = std::abs(last - prev) / last;
  std::ostringstream d;
  d << "geometric max |diff| " << fmt(worst) << "; poisson ratios";
  for (const auto& r : rungs) d << ' ' << fmt(r.ratio, 6);
  d << ", last change " << fmt(change);
  return {worst < 1e-12 && change < 0.05, d.str()};
}

// ---------------------------------------------------------------- 12

std::string capture(const std::string& args, const std::string& env = "") {
  FILE* pipe = popen((env + CGW_CLI_PATH + " " + args + " 2>&1").c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("cannot spawn cli");
  std::string out;
  char buf[4096];
  std::size_t got;
  while ((got = fread(buf, 1, sizeof buf, pipe)) > 0) out.append(buf, got);
  const int status = pclose(pipe);
  out += "\nexit=" + std::to_string(WIFEXITED(status) ? WEXITSTATUS(status) : -1);
  return out;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Outcome determinism() {
  const auto dir = std::filesystem::temp_directory_path() / ("cgw_acceptance_" + std::to_string(::getpid()));
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "a.json") << R"({"law":{"kind":"zeta","alpha":1.5},"n":400,"samples":300,"statistic":"max_h","seed":4})";
  std::ofstream(dir / "b.json") << R"({"law":{"kind":"zeta","alpha":1.5},"n":1600,"samples":300,"statistic":"max_h","seed":5})";
  const std::vector<std::string> runs{
      "sample --law geometric --n 500 --count 200 --seed 5",
      "sample --law zeta --alpha 1.5 --n 800 --count 100 --seed 6 --format csv",
      "sample --law poisson --n 300 --count 100 --seed 7 --strategy rejection",
      "sample --law table --pmf 0.3,0.5,0.1,0.1 --n 200 --count 100 --seed 8",
      "limit --law geometric --N 2000 --samples 200 --statistic max_h --seed 9",
      "limit --law poisson --N 2000 --samples 200 --statistic H_at_u --u 0.5 --seed 10",
      "limit --source bessel --N 1000 --samples 200 --statistic max_y --seed 11",
      "limit --law zeta --alpha 1.5 --N 1000 --samples 100 --statistic h --seed 12 --out run.csv",
      "converge --spec-a " + (dir / "a.json").string() + " --spec-b " + (dir / "b.json").string()};
  int differing = 0;
  std::ostringstream d;
  for (const auto& args : runs) {
    std::string outputs[2];
    for (int w = 0; w < 2; ++w) {
      const auto out_dir = dir / std::to_string(w);
      std::filesystem::create_directories(out_dir);
      outputs[w] = capture(args + " --workers " + (w == 0 ? "1" : "8"), "CGW_OUT_DIR=" + out_dir.string() + " ");
      if (args.find("--out") != std::string::npos) {
        outputs[w] += slurp(out_dir / "run.csv") + slurp(out_dir / "run.csv.meta.json");
      }
    }
    if (outputs[0] != outputs[1] || outputs[0].find("exit=0") == std::string::npos) {
      ++differing;
      d << "differs: " << args << "; ";
    }
  }
  for (const auto& args : {std::string("enumerate --law poisson --n 7"), std::string("check --name dwass --law geometric --n 8"),
                           std::string("check --name height_tail --law poisson --n 100000")}) {
    if (capture(args) != capture(args)) {
      ++differing;
      d << "differs: " << args << "; ";
    }
  }
  std::filesystem::remove_all(dir);
  d << runs.size() + 3 << " invocations, " << differing << " differ";
  return {differing == 0, d.str()};
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;  // 0: none
    Outcome (*fn)();
  };
  const std::vector<Criterion> criteria{
      {1, "bijection", 10, bijection},
      {2, "dwass", 30, dwass},
      {3, "sampler exactness", 120, sampler_exactness},
      {4, "lamperti identity", 60, lamperti_identity},
      {5, "cycle lemma", 10, cycle_lemma},
      {6, "local limit", 60, local_limit},
      {7, "size bias", 180, size_bias},
      {8, "spine trend", 300, spine_trend},
      {9, "self consistency", 600, self_consistency},
      {10, "brownian cross-validation", 600, brownian},
      {11, "height tail", 10, height_tail},
      {12, "determinism", 0, determinism},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    const bool in_time = c.budget_s == 0 || secs < c.budget_s;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    std::cout << (pass ? "PASS" : "FAIL") << " criterion " << c.id << " (" << c.name << ") " << fmt(secs, 3) << "s";
    if (!in_time) std::cout << " over budget " << c.budget_s << "s";
    std::cout << ": " << o.detail << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
