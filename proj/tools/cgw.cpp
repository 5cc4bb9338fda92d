// Command-line front end: sample, enumerate, transform, limit, converge, check.
//
// Exit codes: 0 success, 2 usage error, 1 runtime error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "cgw/cgw.hpp"

namespace {

using nlohmann::json;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct LawOptions {
  std::string name = "geometric";
  double alpha = 1.5;
  std::vector<double> pmf;
  std::string json_file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--law", name, "geometric | poisson | binary | zeta | table");
    cmd->add_option("--alpha", alpha, "stability index for the zeta law, in (1,2)");
    cmd->add_option("--pmf", pmf, "probabilities p_0,p_1,... for the table law")->delimiter(',');
    cmd->add_option("--law-json", json_file, "law as a JSON object {kind, alpha, pmf}");
  }

  cgw::OffspringLaw build() const {
    if (!json_file.empty()) {
      std::ifstream in(json_file);
      if (!in) throw std::runtime_error("cannot read " + json_file);
      return cgw::law_from_json(json::parse(in));
    }
    try {
      cgw::law_kind_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
    return cgw::make_law(name, alpha, pmf);
  }
};

std::filesystem::path resolve_output(const std::string& out) {
  std::filesystem::path p(out);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("CGW_OUT_DIR"); dir != nullptr && *dir != '\0') return std::filesystem::path(dir) / p;
  }
  return p;
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& out) {
    if (!out.empty()) {
      path_ = resolve_output(out);
      file_ = std::make_unique<std::ofstream>(path_, std::ios::binary);
      if (!*file_) throw std::runtime_error("cannot write " + path_.string());
    }
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }
  const std::filesystem::path& path() const { return path_; }
  bool to_file() const { return file_ != nullptr; }

 private:
  std::filesystem::path path_;
  std::unique_ptr<std::ofstream> file_;
};

std::string join(std::span<const std::int64_t> xs, char sep) {
  std::ostringstream os;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) os << sep;
    os << xs[i];
  }
  return os.str();
}

void write_sidecar(const Output& out, const json& metadata) {
  if (!out.to_file()) return;
  std::ofstream meta(out.path().string() + ".meta.json", std::ios::binary);
  meta << metadata.dump(2) << '\n';
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read " + path);
  return json::parse(in);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Conditioned Galton-Watson tree simulation and verification toolkit"};
  app.require_subcommand(1);

  std::string out_path, format = "jsonl", strategy_name;
  std::uint64_t seed = 1, count = 1;
  unsigned workers = 1;
  std::int64_t n = 1;

  // sample
  auto* sample = app.add_subcommand("sample", "Draw CGW(n) trees; one offspring sequence per line");
  LawOptions sample_law;
  sample_law.attach(sample);
  sample->add_option("--n", n, "tree size")->required();
  sample->add_option("--count", count, "number of trees");
  sample->add_option("--seed", seed, "master seed");
  sample->add_option("--strategy", strategy_name, "rejection | uniform_composition | multinomial | dp_sequential");
  sample->add_option("--workers", workers, "worker threads (output does not depend on it)");
  sample->add_option("--format", format, "jsonl (default) | csv with columns replicate,size,height,xi")
      ->check(CLI::IsMember({"jsonl", "csv"}));
  sample->add_option("--out", out_path, "output file (relative paths resolve against $CGW_OUT_DIR)");

  // enumerate
  auto* enumerate = app.add_subcommand("enumerate", "List all trees of size n with exact probabilities");
  LawOptions enum_law;
  enum_law.attach(enumerate);
  enumerate->add_option("--n", n, "tree size (<= 12)")->required();
  enumerate->add_option("--out", out_path, "output file");

  // transform
  auto* transform = app.add_subcommand("transform", "Apply the time change (phi) or profile map (psi) to a step function");
  std::string op, in_path;
  transform->add_option("--op", op, "phi | psi | h")->required()->check(CLI::IsMember({"phi", "psi", "h"}));
  transform->add_option("--in", in_path, "step function JSON {breakpoints, values, domain_end}")->required();
  transform->add_option("--out", out_path, "output file");

  // limit
  auto* limit = app.add_subcommand("limit", "Sample statistics of the limiting profile; CSV, one row per replicate");
  LawOptions limit_law;
  limit_law.attach(limit);
  std::int64_t mesh = 1000;
  std::uint64_t samples = 100;
  std::string statistic = "max_h", source = "lattice";
  double u = 1.0;
  limit->add_option("--N", mesh, "mesh size (>= 100)");
  limit->add_option("--samples", samples, "replicates");
  limit->add_option("--statistic", statistic, "max_h | h | H_at_u | max_y")
      ->check(CLI::IsMember({"max_h", "h", "H_at_u", "max_y"}));
  limit->add_option("--source", source, "lattice | bessel")->check(CLI::IsMember({"lattice", "bessel"}));
  limit->add_option("--u", u, "evaluation point for H_at_u");
  limit->add_option("--strategy", strategy_name, "conditioned sampling strategy");
  limit->add_option("--seed", seed, "master seed");
  limit->add_option("--workers", workers, "worker threads");
  limit->add_option("--out", out_path, "output CSV; a .meta.json sidecar is written next to it");

  // converge
  auto* converge = app.add_subcommand("converge", "Two-sample KS comparison of two experiment specs");
  std::string spec_a, spec_b;
  double level = 0.01;
  converge->add_option("--spec-a", spec_a, "first experiment spec (JSON)")->required();
  converge->add_option("--spec-b", spec_b, "second experiment spec (JSON)")->required();
  converge->add_option("--level", level, "significance level");
  converge->add_option("--workers", workers, "worker threads (overrides the specs)");
  converge->add_option("--out", out_path, "output file for the JSON report");

  // check
  auto* check = app.add_subcommand("check", "Run an exact check and emit a JSON report");
  LawOptions check_law;
  check_law.attach(check);
  std::string check_name;
  check->add_option("--name", check_name, "local_limit | height_tail | dwass")
      ->required()
      ->check(CLI::IsMember({"local_limit", "height_tail", "dwass"}));
  check->add_option("--n", n, "size parameter");
  check->add_option("--out", out_path, "output file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sample) {
      const auto law = sample_law.build();
      const auto strategy = strategy_name.empty() ? cgw::default_strategy(law) : cgw::strategy_from_name(strategy_name);
      if (n < 1) throw UsageError("--n must be >= 1");
      const auto sampler = [&] {
        try {
          return cgw::ConditionedSampler(law, n, strategy);
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());  // e.g. strategy not applicable, or size off the lattice
        }
      }();
      std::vector<cgw::OrderedTree> trees(count);
      cgw::for_each_replicate(count, seed, workers,
                              [&](std::uint64_t r, cgw::Rng& rng) { trees[r] = sampler.sample_tree(rng); });
      Output out(out_path);
      auto& os = out.stream();
      os << "# " << cgw::kFormatVersion << " sample law=" << law.name() << " n=" << n
         << " strategy=" << cgw::strategy_name(strategy) << " seed=" << seed << '\n';
      if (format == "csv") os << "replicate,size,height,xi\n";
      for (std::size_t r = 0; r < trees.size(); ++r) {
        if (format == "csv") {
          os << r << ',' << trees[r].size() << ',' << cgw::height(trees[r]) << ',' << join(trees[r].offspring(), ' ')
             << '\n';
        } else {
          os << cgw::tree_to_json(trees[r]).dump() << '\n';
        }
      }
      return 0;
    }

    if (*enumerate) {
      const auto law = enum_law.build();
      if (n < 1 || n > cgw::kMaxEnumerationSize) throw UsageError("--n must lie in [1, 12]");
      const auto trees = cgw::enumerate_trees(law, n);
      double total = 0.0;
      for (const auto& t : trees) total += t.probability;
      Output out(out_path);
      auto& os = out.stream();
      os << "# " << cgw::kFormatVersion << " enumerate law=" << law.name() << " n=" << n << '\n';
      os << "xi,probability,conditional_probability\n" << std::setprecision(17);
      for (const auto& t : trees) {
        os << join(t.tree.offspring(), ' ') << ',' << t.probability << ',' << t.probability / total << '\n';
      }
      return 0;
    }

    if (*transform) {
      const auto f = cgw::step_function_from_json(read_json_file(in_path));
      json report{{"version", cgw::kFormatVersion}, {"op", op}};
      if (op == "phi") {
        report["result"] = cgw::to_json(cgw::time_change(f));
      } else if (op == "psi") {
        report["result"] = cgw::to_json(cgw::height_transform(f));
      }
      const double h = cgw::harmonic_integral(f);
      report["h"] = std::isinf(h) ? json("inf") : json(h);
      Output out(out_path);
      out.stream() << report.dump() << '\n';
      return 0;
    }

    if (*limit) {
      cgw::ExperimentSpec spec;
      spec.law = limit_law.build();
      spec.n = mesh;
      spec.samples = samples;
      spec.statistic = statistic;
      spec.source = cgw::source_from_name(source);
      if (!strategy_name.empty()) spec.strategy = cgw::strategy_from_name(strategy_name);
      spec.u = u;
      spec.seed = seed;
      spec.workers = workers;
      if (mesh < cgw::kMinLimitMesh) throw UsageError("--N must be >= 100");
      if (spec.source == cgw::Source::Lattice) {
        try {
          cgw::ConditionedSampler(spec.law, spec.n, spec.resolved_strategy());
        } catch (const std::invalid_argument& e) {
          throw UsageError(e.what());
        }
      }
      const auto result = cgw::run(spec);
      Output out(out_path);
      cgw::write_csv(result, out.stream());
      write_sidecar(out, result.metadata);
      return 0;
    }

    if (*converge) {
      auto a = cgw::ExperimentSpec::from_json(read_json_file(spec_a));
      auto b = cgw::ExperimentSpec::from_json(read_json_file(spec_b));
      if (converge->count("--workers") > 0) a.workers = b.workers = workers;
      const auto ra = cgw::run(a);
      const auto rb = cgw::run(b);
      const double d = cgw::ks_distance(ra.sample, rb.sample);
      const double threshold = cgw::ks_threshold(ra.sample.count(), rb.sample.count(), level);
      json report{{"version", cgw::kFormatVersion}, {"check", "converge"},
                  {"statistic", d},                 {"threshold", threshold},
                  {"level", level},                 {"pass", d < threshold},
                  {"spec_a", ra.metadata},          {"spec_b", rb.metadata}};
      Output out(out_path);
      out.stream() << report.dump() << '\n';
      std::cerr << (d < threshold ? "PASS" : "FAIL") << " ks=" << d << " threshold=" << threshold << '\n';
      return 0;
    }

    if (*check) {
      const auto law = check_law.build();
      json report{{"version", cgw::kFormatVersion}, {"check", check_name}, {"n", n}, {"law", cgw::law_to_json(law)}};
      if (check_name == "local_limit") {
        const auto r = cgw::local_limit_check(law, n);
        report["statistic"] = r.max_deviation;
        report["threshold"] = 0.01 * r.density_at_zero;
        report["pass"] = r.max_deviation <= 0.01 * r.density_at_zero;
      } else if (check_name == "height_tail") {
        std::vector<std::int64_t> ladder;
        for (std::int64_t m = 100; m <= std::max<std::int64_t>(n, 100); m *= 10) ladder.push_back(m);
        if (ladder.size() < 2) ladder.push_back(1000);
        const auto rungs = cgw::height_tail_check(law, ladder);
        json rows = json::array();
        for (const auto& r : rungs) rows.push_back({{"n", r.n}, {"k", r.k}, {"tail", r.tail}, {"ratio", r.ratio}});
        const double last = rungs.back().ratio, prev = rungs[rungs.size() - 2].ratio;
        const double change = std::abs(last - prev) / std::abs(last);
        report["rungs"] = rows;
        report["statistic"] = change;
        report["threshold"] = 0.05;
        report["pass"] = change < 0.05;
      } else {
        if (n < 1 || n > cgw::kMaxEnumerationSize) throw UsageError("--n must lie in [1, 12] for dwass");
        double enumerated = 0.0;
        for (const auto& t : cgw::enumerate_trees(law, n)) enumerated += t.probability;
        const double formula = cgw::total_size_pmf(law, n);
        report["statistic"] = std::abs(enumerated - formula);
        report["threshold"] = 1e-12;
        report["pass"] = std::abs(enumerated - formula) < 1e-12;
      }
      Output out(out_path);
      out.stream() << report.dump() << '\n';
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
