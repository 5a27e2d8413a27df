// hetseg — change-point detection in the mean of a possibly
// heteroscedastic signal, with simulation and benchmarking commands.
//
// Exit codes: 0 success, 2 input error, 3 infeasible configuration,
// 4 internal invariant violation.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "hetseg/csv.hpp"
#include "hetseg/select.hpp"
#include "hetseg/simgen.hpp"

namespace {

using namespace hetseg;

Crit1 parse_crit1(const std::string& text) {
  if (text == "erm") return Crit1::erm();
  if (text == "ideal") return Crit1::ideal();
  if (text.rfind("lpo:", 0) == 0) {
    const int p = std::stoi(text.substr(4));
    return Crit1::lpo(p);
  }
  if (text == "lpo") return Crit1::lpo(1);
  throw std::invalid_argument("bad --crit1 '" + text + "' (erm | lpo:P | ideal)");
}

Crit2 parse_crit2(const std::string& text, double overpen) {
  if (text == "pml") return Crit2::pml();
  if (text == "ideal") return Crit2::ideal();
  if (text.rfind("vf:", 0) == 0) return Crit2::vf(std::stoi(text.substr(3)));
  if (text == "vf") return Crit2::vf(5);
  if (text.rfind("bm", 0) == 0) {
    Calibration calib = Calibration::threshold;
    if (text.size() > 2) {
      const std::string tag = text.substr(3);
      if (text[2] != ':' || tag.empty()) throw std::invalid_argument("bad --crit2 '" + text + "'");
      if (tag == "jump") calib = Calibration::max_jump;
      else if (tag == "thresh") calib = Calibration::threshold;
      else if (tag == "sigmahat") calib = Calibration::sigma_hat;
      else if (tag == "sigmatrue") calib = Calibration::sigma_true;
      else throw std::invalid_argument("bad --crit2 calibration '" + tag + "'");
    }
    return Crit2::bm(calib, overpen);
  }
  throw std::invalid_argument("bad --crit2 '" + text + "' (bm[:calib] | vf:V | pml | ideal)");
}

SettingVariant parse_setting(const std::string& setting, const std::string& framework, int n) {
  if (!setting.empty() && !framework.empty())
    throw std::invalid_argument("--setting and --framework are mutually exclusive");
  if (!framework.empty()) {
    RandomFrameworkSpec spec;
    spec.n = n;
    if (framework == "a") spec.framework = Framework::A;
    else if (framework == "b") spec.framework = Framework::B;
    else if (framework == "c") spec.framework = Framework::C;
    else throw std::invalid_argument("bad --framework '" + framework + "' (a | b | c)");
    return spec;
  }
  if (setting.empty()) throw std::invalid_argument("need --setting or --framework");
  const auto colon = setting.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("bad --setting '" + setting + "' (e.g. s2:pc3)");
  const std::string sig = setting.substr(0, colon);
  const std::string noi = setting.substr(colon + 1);
  FixedSetting fixed;
  fixed.n = n;
  if (sig == "s1") fixed.signal = SignalId::s1;
  else if (sig == "s2") fixed.signal = SignalId::s2;
  else if (sig == "s3") fixed.signal = SignalId::s3;
  else throw std::invalid_argument("bad signal '" + sig + "' (s1 | s2 | s3)");
  if (noi == "c") fixed.noise = NoiseId::c;
  else if (noi == "pc1") fixed.noise = NoiseId::pc1;
  else if (noi == "pc2") fixed.noise = NoiseId::pc2;
  else if (noi == "pc3") fixed.noise = NoiseId::pc3;
  else if (noi == "s") fixed.noise = NoiseId::s;
  else throw std::invalid_argument("bad noise '" + noi + "' (c | pc1 | pc2 | pc3 | s)");
  return fixed;
}

BenchProcedure parse_proc(const std::string& text, const DimensionGrid& grid, double overpen) {
  BenchProcedure proc;
  proc.name = text;
  if (text == "oracle") {
    proc.oracle = true;
    proc.spec.grid = grid;
    return proc;
  }
  const auto sep = text.find('x');
  if (sep == std::string::npos)
    throw std::invalid_argument("bad --proc '" + text + "' (crit1xcrit2, e.g. lpo:1xvf:5, or oracle)");
  proc.spec.crit1 = parse_crit1(text.substr(0, sep));
  proc.spec.crit2 = parse_crit2(text.substr(sep + 1), overpen);
  proc.spec.grid = grid;
  return proc;
}

std::string quote_csv(const std::string& field) { return '"' + field + '"'; }

void write_or_print(const std::string& path, const std::string& content) {
  if (path.empty()) {
    std::cout << content;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << content;
}

int cmd_segment(const std::string& input, const std::string& crit1_text,
                const std::string& crit2_text, int dmax_flag, double overpen,
                const std::string& out_path) {
  const Sample sample = load_sample_file(input);
  const DimensionGrid grid = dmax_flag > 0 ? DimensionGrid::make(sample.n(), dmax_flag)
                                           : DimensionGrid::defaults(sample.n());
  ProcedureSpec spec{parse_crit1(crit1_text), parse_crit2(crit2_text, overpen), grid};
  const ProcedureResult res = run_procedure(spec, sample);

  std::ostringstream segments;
  segments << "segment,start_index,end_index,t_start,t_end,mean\n";
  for (int k = 0; k < res.seg.dimension(); ++k) {
    auto [first, last] = res.seg.segment(k);
    segments << (k + 1) << ',' << first << ',' << last << ','
             << format_double(sample.t[static_cast<std::size_t>(first - 1)]) << ','
             << format_double(sample.t[static_cast<std::size_t>(last - 1)]) << ','
             << format_double(res.fitted.levels()[static_cast<std::size_t>(k)]) << '\n';
  }

  std::ostringstream curves;
  curves << "D,crit1_value,crit2_value,breakpoints\n";
  for (std::size_t i = 0; i < res.dims.size(); ++i) {
    curves << res.dims[i] << ',' << format_double(res.crit1_values[i]) << ','
           << format_double(res.crit2_values[i]) << ',' << quote_csv(res.path[i].serialize())
           << '\n';
  }

  write_or_print(out_path, segments.str());
  if (!out_path.empty()) {
    write_or_print(out_path + ".curves.csv", curves.str());
  } else {
    std::cout << '\n' << curves.str();
  }
  std::cout << "d_hat=" << res.d_hat << " breakpoints=" << res.seg.serialize() << '\n';
  return 0;
}

int cmd_simulate(const SettingVariant& setting, std::uint64_t seed, const std::string& out_path) {
  Rng rng = Rng::substream(seed, 0);
  SignalPair pair = std::holds_alternative<FixedSetting>(setting)
                        ? make_fixed_signal(std::get<FixedSetting>(setting))
                        : draw_random_framework(std::get<RandomFrameworkSpec>(setting), rng);
  const Sample sample = simulate_sample(pair.s, pair.sigma, setting_n(setting), rng);
  std::ostringstream out;
  save_sample(out, sample);
  write_or_print(out_path, out.str());
  return 0;
}

int cmd_bench(const SettingVariant& setting, const std::vector<std::string>& proc_texts,
              const std::string& crit1_text, const std::string& crit2_text, int dmax_flag,
              double overpen, int n_rep, std::uint64_t seed, const std::string& out_path) {
  const int n = setting_n(setting);
  const DimensionGrid grid =
      dmax_flag > 0 ? DimensionGrid::make(n, dmax_flag) : DimensionGrid::defaults(n);
  std::vector<BenchProcedure> procs;
  if (proc_texts.empty()) {
    procs.push_back(parse_proc(crit1_text + "x" + crit2_text, grid, overpen));
  } else {
    for (const auto& text : proc_texts) procs.push_back(parse_proc(text, grid, overpen));
  }
  const BenchReport report = run_benchmark(procs, setting, grid, n_rep, seed);
  std::ostringstream out;
  out << "procedure,setting,index_kind,value,stderr,stderr_naive,N,seed\n";
  for (const auto& row : report.rows) {
    out << row.procedure << ',' << row.setting << ',' << index_kind_name(row.kind) << ','
        << format_double(row.value) << ',' << format_double(row.stderr_delta) << ','
        << format_double(row.stderr_naive) << ',' << row.replicates << ',' << row.seed << '\n';
  }
  write_or_print(out_path, out.str());
  return 0;
}

int cmd_riskcurve(const SettingVariant& setting, const std::vector<std::string>& proc_texts,
                  int dmax_flag, int n_rep, std::uint64_t seed, const std::string& out_path) {
  const int n = setting_n(setting);
  const DimensionGrid grid =
      dmax_flag > 0 ? DimensionGrid::make(n, dmax_flag) : DimensionGrid::defaults(n);
  std::vector<std::pair<std::string, Crit1>> rules;
  if (proc_texts.empty()) {
    rules = {{"erm", Crit1::erm()}, {"lpo:1", Crit1::lpo(1)},
             {"lpo:20", Crit1::lpo(20)}, {"lpo:50", Crit1::lpo(50)}};
  } else {
    for (const auto& text : proc_texts) rules.emplace_back(text, parse_crit1(text));
  }
  const auto curves = run_risk_curves(rules, setting, grid, n_rep, seed);
  std::ostringstream out;
  out << "procedure,D,mean_loss,stderr\n";
  for (const auto& curve : curves) {
    for (std::size_t i = 0; i < curve.dims.size(); ++i) {
      out << curve.procedure << ',' << curve.dims[i] << ',' << format_double(curve.mean_loss[i])
          << ',' << format_double(curve.stderr_loss[i]) << '\n';
    }
  }
  write_or_print(out_path, out.str());
  return 0;
}

}  // namespace

namespace {

int run_main(int argc, char** argv) {
  CLI::App app{"Change-point detection in the mean of heteroscedastic signals"};
  app.require_subcommand(1);

  std::string input, setting_text, framework_text, out_path;
  std::string crit1_text = "lpo:1", crit2_text = "vf:5";
  std::vector<std::string> proc_texts;
  int n = 100, n_rep = 100, dmax_flag = 0;
  double overpen = 1.0;
  std::uint64_t seed = 12345;

  auto add_common = [&](CLI::App* cmd, bool with_setting) {
    cmd->add_option("--seed", seed, "RNG seed");
    cmd->add_option("--out", out_path, "output path (default: stdout)");
    if (with_setting) {
      cmd->add_option("--setting", setting_text, "fixed setting, e.g. s2:pc3");
      cmd->add_option("--framework", framework_text, "random framework: a | b | c");
      cmd->add_option("--n", n, "sample size");
    }
  };

  auto* segment = app.add_subcommand("segment", "segment a CSV sample (header t,y)");
  segment->add_option("--input", input, "input CSV path")->required();
  segment->add_option("--crit1", crit1_text, "localization rule: erm | lpo:P | ideal");
  segment->add_option("--crit2", crit2_text, "dimension rule: bm[:calib] | vf:V | pml | ideal");
  segment->add_option("--dmax", dmax_flag, "largest dimension (default 4n/10)");
  segment->add_option("--overpen", overpen, "penalty multiplier for bm");
  add_common(segment, false);

  auto* simulate = app.add_subcommand("simulate", "draw one sample from a setting");
  add_common(simulate, true);

  auto* bench = app.add_subcommand("bench", "Monte-Carlo loss-ratio benchmark");
  bench->add_option("--N", n_rep, "replicates");
  bench->add_option("--proc", proc_texts, "procedure crit1xcrit2 or 'oracle' (repeatable)");
  bench->add_option("--crit1", crit1_text, "default procedure crit1");
  bench->add_option("--crit2", crit2_text, "default procedure crit2");
  bench->add_option("--dmax", dmax_flag, "largest dimension (default 4n/10)");
  bench->add_option("--overpen", overpen, "penalty multiplier for bm");
  add_common(bench, true);

  auto* riskcurve = app.add_subcommand("riskcurve", "replicate-averaged loss per dimension");
  riskcurve->add_option("--N", n_rep, "replicates");
  riskcurve->add_option("--proc", proc_texts, "localization rules (default erm, lpo:1, lpo:20, lpo:50)");
  riskcurve->add_option("--dmax", dmax_flag, "largest dimension (default 4n/10)");
  add_common(riskcurve, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    app.exit(e);
    return 2;
  }

  try {
    if (segment->parsed())
      return cmd_segment(input, crit1_text, crit2_text, dmax_flag, overpen, out_path);
    const SettingVariant setting = parse_setting(setting_text, framework_text, n);
    if (simulate->parsed()) return cmd_simulate(setting, seed, out_path);
    if (bench->parsed())
      return cmd_bench(setting, proc_texts, crit1_text, crit2_text, dmax_flag, overpen, n_rep,
                       seed, out_path);
    if (riskcurve->parsed())
      return cmd_riskcurve(setting, proc_texts, dmax_flag, n_rep, seed, out_path);
  } catch (const CsvError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::length_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  }
  return 2;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run_main(argc, argv);
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << '\n';
    return 4;
  } catch (...) {
    std::cerr << "internal error\n";
    return 4;
  }
}
