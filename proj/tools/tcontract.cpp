// Command-line front end: classify and plan contractions, enumerate slicing
// alternatives, execute with optional brute-force verification, and run the
// benchmark sweeps to CSV.
//
// Exit status: 0 success, 1 verification failure, 2 usage or parse error,
// 3 resource cap exceeded.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "tc/bench.hpp"
#include "tc/executor.hpp"
#include "tc/metric.hpp"
#include "tc/oracle.hpp"
#include "tc/tensor_io.hpp"

namespace {

std::map<std::string, std::int64_t> parse_extents(const std::string& s) {
  std::map<std::string, std::int64_t> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos)
      throw tc::parse_error("--extents entries must look like label=N", 0);
    const std::string label = item.substr(0, eq);
    const std::int64_t value = std::stoll(item.substr(eq + 1));
    if (value <= 0) throw tc::parse_error("extent must be positive", 0);
    out[label] = value;
  }
  return out;
}

tc::Tensor make_operand(const tc::TensorExpr& te,
                        const std::map<std::string, std::int64_t>& extents,
                        std::uint64_t seed) {
  std::vector<std::int64_t> ext;
  std::vector<tc::Variance> var;
  for (const auto& idx : te.indices) {
    auto it = extents.find(idx.label);
    if (it == extents.end())
      throw tc::parse_error("no extent given for label '" + idx.label + "'", 0);
    ext.push_back(it->second);
    var.push_back(idx.var);
  }
  return tc::Tensor::seeded_random(std::move(ext), std::move(var), seed, te.name);
}

std::vector<std::int64_t> parse_sizes(const std::string& s) {
  std::vector<std::int64_t> out;
  std::istringstream is(s);
  std::string item;
  while (std::getline(is, item, ',')) out.push_back(std::stoll(item));
  return out;
}

struct Common {
  std::string extents;
  std::uint64_t seed = 1;
  std::string backend = "reference";
  int workers = 1;
  bool positional = false;
};

int cmd_plan(const std::string& expr, const Common& c) {
  const auto spec = tc::parse(expr, c.positional);
  const auto extents = parse_extents(c.extents);
  const auto left = make_operand(spec.left, extents, c.seed);
  const auto right = make_operand(spec.right, extents, c.seed + 1);
  const auto v = tc::validate(spec, left, right);
  const auto p = tc::plan(v);
  std::cout << tc::render_plan(p, v);
  if (const auto advice = tc::relayout_advice(v))
    std::cout << "relayout: " << *advice << "\n";
  return 0;
}

int cmd_enumerate(const std::string& expr, const Common& c, const std::string& csv) {
  const auto spec = tc::parse(expr, c.positional);
  const auto extents = parse_extents(c.extents);
  const auto left = make_operand(spec.left, extents, c.seed);
  const auto right = make_operand(spec.right, extents, c.seed + 1);
  const auto v = tc::validate(spec, left, right);

  std::ostringstream os;
  os << "s_left,s_right,r1,r2,r3,fallback,kernel\n";
  auto vec = [](const tc::SlicingVector& s) {
    std::string t = "(";
    for (std::size_t i = 0; i < s.size(); ++i) {
      if (i) t += ' ';
      t += s[i] ? '1' : '0';
    }
    return t + ")";
  };
  for (const auto& opt : tc::enumerate_slicings(v)) {
    os << vec(opt.s_left) << ',' << vec(opt.s_right) << ','
       << (opt.report.r1_ok ? 1 : 0) << ',' << (opt.report.r2_ok ? 1 : 0) << ','
       << (opt.report.r3_ok ? 1 : 0) << ',' << tc::to_string(opt.report.fallback)
       << ',' << tc::to_string(opt.report.kernel) << '\n';
  }
  if (csv.empty()) {
    std::cout << os.str();
  } else {
    std::ofstream f(csv);
    f << os.str();
  }
  return 0;
}

int cmd_run(const std::string& expr, const Common& c, const std::string& kernel,
            bool verify, const std::string& out_path) {
  const auto spec = tc::parse(expr, c.positional);
  const auto extents = parse_extents(c.extents);
  const auto left = make_operand(spec.left, extents, c.seed);
  const auto right = make_operand(spec.right, extents, c.seed + 1);
  const auto v = tc::validate(spec, left, right);

  tc::PlanPolicy policy = tc::PlanPolicy::auto_policy();
  if (!kernel.empty()) {
    const auto k = tc::kernel_from_string(kernel);
    if (!k) throw tc::parse_error("unknown kernel '" + kernel + "'", 0);
    policy = tc::PlanPolicy::force_kernel(*k);
  }
  const auto p = tc::plan(v, policy);
  const auto backend = tc::make_backend(c.backend);
  auto [result, stats] = tc::execute(p, v, left, right, *backend, c.workers);

  const std::string path =
      out_path.empty() ? spec.output.name + ".tensor" : out_path;
  tc::write_tensor_file(path, result);

  std::cout << "kernel=" << tc::to_string(p.kernel)
            << " class=" << tc::to_string(p.cls)
            << " kernel_calls=" << stats.kernel_calls
            << " packed_bytes=" << stats.packed_bytes
            << " flops=" << stats.flops << " seconds=" << stats.wall_seconds
            << " output=" << path << "\n";

  if (verify) {
    const auto ref = tc::contract_naive(v, left, right);
    const double err = tc::max_rel_error(result, ref);
    std::cout << "max_rel_err=" << err << "\n";
    if (!(err <= 1e-10)) {
      std::cerr << "verification failed: max relative error " << err << "\n";
      return 1;
    }
  }
  return 0;
}

int cmd_bench(tc::BenchConfig cfg, const std::string& csv, bool verify) {
  cfg.verify_sample = verify;
  const auto rows = tc::run_bench(cfg);
  if (csv.empty()) {
    tc::write_bench_csv(std::cout, rows);
  } else {
    std::ofstream f(csv);
    tc::write_bench_csv(f, rows);
  }
  bool ok = true;
  for (const auto& r : rows)
    if (!r.verified_ok) {
      std::cerr << "verification failed: " << r.expression << " kernel "
                << r.kernel << " size " << r.size << "\n";
      ok = false;
    }
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Tensor contraction engine: classify, slice, and map onto "
               "matrix/vector kernels"};
  app.require_subcommand(1);

  Common c;
  std::string expr, kernel, csv, out_path;
  bool verify = false;

  auto add_common = [&](CLI::App* sub, bool needs_expr) {
    if (needs_expr)
      sub->add_option("expr", expr, "contraction expression")->required();
    sub->add_option("--extents", c.extents, "per-label extents, e.g. a=4,b=5");
    sub->add_option("--seed", c.seed, "operand fill seed");
    sub->add_option("--backend", c.backend)
        ->check(CLI::IsMember({"reference", "external"}));
    sub->add_option("--workers", c.workers)->check(CLI::PositiveNumber);
    sub->add_flag("--positional", c.positional,
                  "skip the opposite-variance pairing rule");
  };

  auto* plan_cmd = app.add_subcommand("plan", "classify and report the auto plan");
  add_common(plan_cmd, true);

  auto* enum_cmd =
      app.add_subcommand("enumerate", "list every slicing with its kernel");
  add_common(enum_cmd, true);
  enum_cmd->add_option("--csv", csv, "write the table to a file");

  auto* run_cmd = app.add_subcommand("run", "execute and write the result tensor");
  add_common(run_cmd, true);
  run_cmd->add_option("--kernel", kernel, "force a kernel kind");
  run_cmd->add_flag("--verify", verify, "compare against the brute-force oracle");
  run_cmd->add_option("--out", out_path, "result file path");

  tc::BenchConfig bcfg;
  std::string sizes_s, kernels_s;
  auto* bench_cmd = app.add_subcommand("bench", "run an experiment sweep to CSV");
  bench_cmd->add_option("--experiment", bcfg.experiment)
      ->check(CLI::IsMember({"square3d", "cc4d", "gr4d", "custom"}));
  bench_cmd->add_option("--sizes", sizes_s, "comma-separated sweep sizes");
  bench_cmd->add_option("--kernels", kernels_s, "comma-separated kernel kinds");
  bench_cmd->add_option("--reps", bcfg.repetitions)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--seed", bcfg.seed);
  bench_cmd->add_option("--backend", bcfg.backend)
      ->check(CLI::IsMember({"reference", "external"}));
  bench_cmd->add_option("--workers", bcfg.workers)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--mem-cap", bcfg.mem_cap_bytes, "memory estimate cap, bytes");
  bench_cmd->add_option("--csv", csv, "CSV output path");
  bench_cmd->add_option("--expr", bcfg.custom_expr, "custom experiment expression");
  bench_cmd->add_option("--extents", c.extents, "custom experiment extents");
  bench_cmd->add_flag("--verify", verify, "oracle-check a sampled output line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (plan_cmd->parsed()) return cmd_plan(expr, c);
    if (enum_cmd->parsed()) return cmd_enumerate(expr, c, csv);
    if (run_cmd->parsed()) return cmd_run(expr, c, kernel, verify, out_path);
    if (bench_cmd->parsed()) {
      if (!sizes_s.empty()) bcfg.sizes = parse_sizes(sizes_s);
      if (bcfg.sizes.empty()) {
        if (bcfg.experiment == "square3d") bcfg.sizes = {50, 100, 150, 200};
        else if (bcfg.experiment == "cc4d") bcfg.sizes = {10, 20, 30};
        else bcfg.sizes = {100, 200};
      }
      if (!kernels_s.empty()) {
        std::istringstream is(kernels_s);
        std::string item;
        while (std::getline(is, item, ',')) {
          const auto k = tc::kernel_from_string(item);
          if (!k) throw tc::parse_error("unknown kernel '" + item + "'", 0);
          bcfg.kernels.push_back(*k);
        }
      }
      if (bcfg.kernels.empty()) {
        bcfg.kernels = {tc::KernelKind::Gemm, tc::KernelKind::CopyGemm,
                        tc::KernelKind::Gemv, tc::KernelKind::Ger};
        if (bcfg.experiment == "cc4d" || bcfg.experiment == "gr4d")
          bcfg.kernels = {tc::KernelKind::Gemm, tc::KernelKind::CopyGemm,
                          tc::KernelKind::Dot, tc::KernelKind::Ger};
      }
      if (bcfg.experiment == "custom") bcfg.custom_extents = parse_extents(c.extents);
      return cmd_bench(bcfg, csv, verify);
    }
  } catch (const tc::parse_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tc::resource_limit_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const tc::kernel_unreachable_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
