#pragma once

// Command-line front end: construct, verify, kelvin-check, kernel-table, report.

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "polysing/constructor.hpp"
#include "polysing/io.hpp"
#include "polysing/kelvin.hpp"
#include "polysing/kernel.hpp"
#include "polysing/verify.hpp"

namespace polysing {

inline constexpr const char* kOutDirEnv = "POLYSING_OUT_DIR";

enum ExitCode : int { kExitPass = 0, kExitFail = 1, kExitUsage = 2, kExitInadmissible = 3, kExitError = 4 };

struct RunConfig {
  std::string command;
  std::string theorem = "1.5";
  int m = 3;
  int n = 7;
  std::string lambda = "3";
  std::string phi = "pow:1";
  int jmax = 8;
  int retries = 0;            // halvings of A_used if the inequality fails after construct
  std::string out;            // construct: spec path; verify: certificate path
  std::string spec;           // verify: input spec
  std::string out_dir = "out";
  int mmax = 5;
  int nmax = 12;
  std::uint64_t seed = 12345;
  double rel_tol = 1e-8;
  int samples = 50;
  std::string config_file;

  Json to_json() const {
    return {{"command", command}, {"theorem", theorem}, {"m", m},         {"n", n},
            {"lambda", lambda},   {"phi", phi},         {"jmax", jmax},   {"retries", retries},
            {"mmax", mmax},       {"nmax", nmax},       {"seed", seed},   {"rel_tol", rel_tol},
            {"samples", samples}, {"spec", spec},       {"out", out},     {"out_dir", out_dir}};
  }
  std::string digest() const { return sha256_hex(to_json().dump()); }

  // Keys present in the file win over flags.
  void apply(const Json& j) {
    auto take = [&](const char* k, auto& field) {
      if (j.contains(k)) field = j.at(k).get<std::remove_reference_t<decltype(field)>>();
    };
    take("theorem", theorem);
    take("m", m);
    take("n", n);
    if (j.contains("lambda")) lambda = j["lambda"].is_string() ? j["lambda"].get<std::string>() : j["lambda"].dump();
    take("phi", phi);
    take("jmax", jmax);
    take("retries", retries);
    take("out", out);
    take("spec", spec);
    take("out_dir", out_dir);
    take("mmax", mmax);
    take("nmax", nmax);
    take("seed", seed);
    take("rel_tol", rel_tol);
    take("samples", samples);
  }

  VerifyConfig verify_config() const {
    VerifyConfig v;
    v.quad.rel_tol = rel_tol;
    v.samples_per_bump = samples;
    v.seed = seed;
    return v;
  }
  BuildOptions build_options() const {
    BuildOptions b;
    b.j_max = jmax;
    b.seed = seed;
    return b;
  }
};

struct ReferenceConfig {
  TheoremTag theorem;
  int m, n;
  const char* lambda;
  const char* phi;
};

inline const std::vector<ReferenceConfig>& reference_configs() {
  static const std::vector<ReferenceConfig> r{
      {TheoremTag::T1_5, 3, 7, "3", "pow:1"},    {TheoremTag::T1_6, 3, 7, "7", "log"},
      {TheoremTag::T1_8, 3, 6, "3", "pow:1"},    {TheoremTag::T1_10, 3, 6, "1/2", "pow:1"},
      {TheoremTag::T1_11, 3, 6, "1", "log"},     {TheoremTag::T1_17, 3, 7, "2", "pow:1"}};
  return r;
}

inline const std::vector<std::pair<int, int>>& kelvin_sweep_pairs() {
  static const std::vector<std::pair<int, int>> p{{1, 3}, {3, 6}, {3, 7}, {3, 8}, {5, 10}};
  return p;
}

namespace detail {

inline std::string json_with_run(Json j, const RunConfig& cfg) {
  j["run"] = {{"config_digest", cfg.digest()}, {"seed", cfg.seed}};
  return j.dump(2) + "\n";
}

inline std::string csv_with_run(const std::string& body, const RunConfig& cfg) {
  return "# config_digest=" + cfg.digest() + " seed=" + std::to_string(cfg.seed) + "\n" + body;
}

inline std::filesystem::path ensure_dir(const std::filesystem::path& p) {
  std::filesystem::create_directories(p);
  return p;
}

inline std::string kernel_table_csv(const std::vector<KernelTableRow>& rows) {
  std::ostringstream os;
  os << "m,n,branch,phi,delta_m_phi_zero,delta_m1_phi_nonzero,gamma_inf_polyharmonic\n";
  for (const auto& r : rows)
    os << r.m << "," << r.n << "," << r.branch << ",\"" << r.phi << "\"," << (r.polyharmonic ? "pass" : "FAIL") << ","
       << (r.minimal_order ? "pass" : "FAIL") << "," << (r.gamma_inf_ok ? "pass" : "FAIL") << "\n";
  return os.str();
}

inline std::string kelvin_csv(const std::vector<std::pair<int, int>>& pairs, int smin, int smax, int& failures) {
  std::ostringstream os;
  os << "m,n,s_min,s_max,cases,failures\n";
  failures = 0;
  for (const auto& mn : pairs) {
    const auto sw = kelvin_sweep({mn}, smin, smax);
    failures += sw.failures;
    os << mn.first << "," << mn.second << "," << smin << "," << smax << "," << sw.cases << "," << sw.failures << "\n";
  }
  return os.str();
}

// CSV of every check whose evidence carries a "rows" table.
inline std::vector<std::pair<std::string, std::string>> row_tables(const Certificate& cert) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& c : cert.checks()) {
    if (!c.evidence.is_object() || !c.evidence.contains("rows")) continue;
    const auto& rows = c.evidence["rows"];
    if (!rows.is_array() || rows.empty() || !rows[0].is_object()) continue;
    std::vector<std::string> keys;
    for (auto it = rows[0].begin(); it != rows[0].end(); ++it) keys.push_back(it.key());
    std::ostringstream os;
    os << std::setprecision(17);
    for (std::size_t i = 0; i < keys.size(); ++i) os << (i ? "," : "") << keys[i];
    os << "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (i) os << ",";
        if (r.contains(keys[i])) os << r[keys[i]].dump();
      }
      os << "\n";
    }
    out.emplace_back(c.name, os.str());
  }
  return out;
}

inline Json slope_rows(const Certificate& cert) {
  Json rows = Json::array();
  for (const auto& c : cert.checks())
    if (c.evidence.is_object() && c.evidence.contains("fitted"))
      rows.push_back({{"check", c.name},
                      {"fitted", c.evidence["fitted"]},
                      {"stderr", c.evidence.value("stderr", 0.0)},
                      {"expected", c.evidence.value("expected", 0.0)},
                      {"verdict", to_string(c.verdict)}});
  return rows;
}

}  // namespace detail

inline int cmd_construct(const RunConfig& cfg, std::ostream& out) {
  const TheoremTag thm = theorem_from_string(cfg.theorem);
  const Rational lambda = parse_rational(cfg.lambda);
  const PhiPreset phi = PhiPreset::parse(cfg.phi);
  SolutionSpec spec;
  int halvings = 0;
  if (cfg.retries > 0) {
    auto r = construct_and_certify(thm, cfg.m, cfg.n, lambda, phi, cfg.build_options(), cfg.verify_config(), cfg.retries);
    spec = std::move(r.spec);
    halvings = r.halvings;
  } else {
    spec = build_spec(thm, cfg.m, cfg.n, lambda, phi, cfg.build_options());
  }
  const std::filesystem::path spec_path =
      cfg.out.empty() ? detail::ensure_dir(cfg.out_dir) / "spec.json" : std::filesystem::path(cfg.out);
  if (spec_path.has_parent_path()) detail::ensure_dir(spec_path.parent_path());
  std::filesystem::path csv_path = spec_path;
  csv_path.replace_extension(".csv");
  write_text(spec_path.string(), detail::json_with_run(spec_to_json(spec), cfg));
  write_text(csv_path.string(), detail::csv_with_run(sequence_csv(spec), cfg));
  out << theorem_title(thm) << ": " << spec.bumps.size() << " bumps, A_used=" << spec.A_used << ", C=" << spec.C
      << (halvings ? ", A_used halved " + std::to_string(halvings) + "x" : std::string{}) << "\n"
      << "spec     " << spec_path.string() << "\n"
      << "sequence " << csv_path.string() << "\n"
      << "digest   " << spec_digest(spec) << "\n";
  return kExitPass;
}

inline int cmd_verify(const RunConfig& cfg, std::ostream& out) {
  if (cfg.spec.empty()) throw std::invalid_argument("verify needs --spec");
  const SolutionSpec spec = read_spec(cfg.spec);
  const Certificate cert = certify_spec(spec, cfg.verify_config());
  std::filesystem::path cert_path = cfg.out;
  if (cert_path.empty()) {
    cert_path = std::filesystem::path(cfg.spec);
    cert_path.replace_filename(cert_path.stem().string() + ".certificate.json");
  }
  if (cert_path.has_parent_path()) detail::ensure_dir(cert_path.parent_path());
  write_text(cert_path.string(), detail::json_with_run(cert.to_json(), cfg));
  out << cert.summary_table() << "certificate " << cert_path.string() << "\n";
  return cert.overall() ? kExitPass : kExitFail;
}

inline int cmd_kelvin(const RunConfig& cfg, std::ostream& out) {
  int failures = 0;
  const std::string table = detail::kelvin_csv(kelvin_sweep_pairs(), -9, 9, failures);
  const auto [lhs, rhs] = kelvin_witness(3, 3, 7);
  const bool witness = lhs == -576 && rhs == -576;
  out << table << "witness m=3 n=7 s=3: " << rational_str(lhs) << " vs " << rational_str(rhs)
      << (witness ? " (ok)" : " (MISMATCH)") << "\n";
  detail::ensure_dir(cfg.out_dir);
  write_text((std::filesystem::path(cfg.out_dir) / "kelvin_sweep.csv").string(), detail::csv_with_run(table, cfg));
  return failures == 0 && witness ? kExitPass : kExitFail;
}

inline int cmd_kernel_table(const RunConfig& cfg, std::ostream& out) {
  const auto rows = kernel_table(cfg.mmax, cfg.nmax);
  const std::string csv = detail::kernel_table_csv(rows);
  out << csv;
  detail::ensure_dir(cfg.out_dir);
  write_text((std::filesystem::path(cfg.out_dir) / "kernel_table.csv").string(), detail::csv_with_run(csv, cfg));
  for (const auto& r : rows)
    if (!r.polyharmonic || !r.minimal_order || !r.gamma_inf_ok) return kExitFail;
  return kExitPass;
}

struct ReportJob {
  ReferenceConfig ref;
  SolutionSpec spec;
  Certificate cert;
  int halvings = 0;
  double seconds = 0.0;
  std::string error;
};

inline ReportJob run_reference(const ReferenceConfig& ref, const RunConfig& cfg) {
  ReportJob job{ref, {}, {}, 0, 0.0, {}};
  const auto t0 = std::chrono::steady_clock::now();
  try {
    auto r = construct_and_certify(ref.theorem, ref.m, ref.n, parse_rational(ref.lambda), PhiPreset::parse(ref.phi),
                                   cfg.build_options(), cfg.verify_config());
    job.spec = std::move(r.spec);
    job.halvings = r.halvings;
    job.cert = certify_spec(job.spec, cfg.verify_config());
  } catch (const std::exception& e) {
    job.error = e.what();
  }
  job.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return job;
}

inline int cmd_report(const RunConfig& cfg, std::ostream& out) {
  const auto dir = detail::ensure_dir(std::filesystem::path(cfg.out_dir) / "report");
  Json bundle;
  bundle["config"] = cfg.to_json();
  bool all_ok = true;

  const auto krows = kernel_table(cfg.mmax, cfg.nmax);
  const std::string kcsv = detail::kernel_table_csv(krows);
  write_text((dir / "kernel_table.csv").string(), detail::csv_with_run(kcsv, cfg));
  int kfail = 0;
  for (const auto& r : krows) kfail += !(r.polyharmonic && r.minimal_order && r.gamma_inf_ok);
  bundle["kernel_table"] = {{"rows", krows.size()}, {"failures", kfail}};
  all_ok = all_ok && kfail == 0;
  out << "kernel table: " << krows.size() << " rows, " << kfail << " failures\n";

  int kelvin_fail = 0;
  const std::string kel = detail::kelvin_csv(kelvin_sweep_pairs(), -9, 9, kelvin_fail);
  write_text((dir / "kelvin_sweep.csv").string(), detail::csv_with_run(kel, cfg));
  bundle["kelvin_sweep"] = {{"failures", kelvin_fail}};
  all_ok = all_ok && kelvin_fail == 0;
  out << "kelvin sweep: " << kelvin_fail << " failures\n";

  std::vector<std::future<ReportJob>> futures;
  for (const auto& ref : reference_configs())
    futures.push_back(std::async(std::launch::async, run_reference, ref, cfg));

  std::ostringstream summary, slopes;
  summary << "theorem,m,n,lambda,phi,bumps,halvings,overall,failed_checks,seconds\n";
  slopes << std::setprecision(17) << "theorem,check,fitted,stderr,expected,verdict\n";
  bundle["constructions"] = Json::array();
  for (auto& f : futures) {
    ReportJob job = f.get();
    const std::string tag = to_string(job.ref.theorem);
    const auto jdir = detail::ensure_dir(dir / tag);
    Json entry{{"theorem", tag}, {"title", theorem_title(job.ref.theorem)}, {"m", job.ref.m}, {"n", job.ref.n},
               {"lambda", job.ref.lambda}, {"phi", job.ref.phi}, {"seconds", job.seconds}};
    std::string failed;
    if (!job.error.empty()) {
      entry["error"] = job.error;
      all_ok = false;
      failed = "error";
    } else {
      write_text((jdir / "spec.json").string(), detail::json_with_run(spec_to_json(job.spec), cfg));
      write_text((jdir / "sequence.csv").string(), detail::csv_with_run(sequence_csv(job.spec), cfg));
      write_text((jdir / "certificate.json").string(), detail::json_with_run(job.cert.to_json(), cfg));
      for (const auto& [name, csv] : detail::row_tables(job.cert))
        write_text((jdir / (name + ".csv")).string(), detail::csv_with_run(csv, cfg));
      for (const auto& s : detail::slope_rows(job.cert))
        slopes << tag << "," << s["check"].get<std::string>() << "," << s["fitted"].dump() << ","
               << s["stderr"].dump() << "," << s["expected"].dump() << "," << s["verdict"].get<std::string>() << "\n";
      entry["overall"] = job.cert.overall() ? "pass" : "fail";
      entry["halvings"] = job.halvings;
      entry["spec_digest"] = job.cert.digest();
      entry["certificate"] = job.cert.to_json();
      for (const auto& c : job.cert.failed()) failed += (failed.empty() ? "" : ";") + c;
      all_ok = all_ok && job.cert.overall();
      out << job.cert.summary_table();
    }
    summary << tag << "," << job.ref.m << "," << job.ref.n << "," << job.ref.lambda << "," << job.ref.phi << ","
            << job.spec.bumps.size() << "," << job.halvings << ","
            << (job.error.empty() && job.cert.overall() ? "pass" : "fail") << "," << failed << "," << job.seconds
            << "\n";
    bundle["constructions"].push_back(std::move(entry));
  }
  write_text((dir / "summary.csv").string(), detail::csv_with_run(summary.str(), cfg));
  write_text((dir / "slope_fits.csv").string(), detail::csv_with_run(slopes.str(), cfg));
  bundle["overall"] = all_ok ? "pass" : "fail";
  write_text((dir / "report.json").string(), detail::json_with_run(bundle, cfg));
  out << "report " << (dir / "report.json").string() << ": " << (all_ok ? "PASS" : "FAIL") << "\n";
  return all_ok ? kExitPass : kExitFail;
}

inline int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  try {
    if (cfg.command == "construct") return cmd_construct(cfg, out);
    if (cfg.command == "verify") return cmd_verify(cfg, out);
    if (cfg.command == "kelvin-check") return cmd_kelvin(cfg, out);
    if (cfg.command == "kernel-table") return cmd_kernel_table(cfg, out);
    if (cfg.command == "report") return cmd_report(cfg, out);
    err << "unknown command '" << cfg.command << "'\n";
    return kExitUsage;
  } catch (const InadmissibleError& e) {
    err << "inadmissible: " << e.what() << "\n";
    return kExitInadmissible;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitError;
  }
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  RunConfig cfg;
  if (const char* d = std::getenv(kOutDirEnv); d && *d) cfg.out_dir = d;

  CLI::App app{"polysing: constructed singular solutions of polyharmonic inequalities"};
  app.require_subcommand(1);
  app.fallthrough();
  app.option_defaults()->always_capture_default();
  app.add_option("--seed", cfg.seed, "RNG seed for sample points");
  app.add_option("--out-dir", cfg.out_dir, std::string("output directory (env ") + kOutDirEnv + ")");
  app.add_option("--config", cfg.config_file, "JSON file; its keys override flags");
  app.add_option("--rel-tol", cfg.rel_tol, "quadrature relative tolerance");
  app.add_option("--samples", cfg.samples, "Sobol samples per bump");

  auto* construct = app.add_subcommand("construct", "build a bump sequence and write spec JSON + sequence CSV");
  construct->add_option("--theorem", cfg.theorem, "1.5, 1.6, 1.8, 1.10, 1.11 or 1.17");
  construct->add_option("--m", cfg.m);
  construct->add_option("--n", cfg.n);
  construct->add_option("--lambda", cfg.lambda, "rational, e.g. 3, 1/2, 0.5");
  construct->add_option("--phi", cfg.phi, "pow:a, log, loglog or explog");
  construct->add_option("--jmax", cfg.jmax, "number of retained bumps");
  construct->add_option("--retries", cfg.retries, "halve A_used up to this many times if the inequality fails");
  construct->add_option("--out", cfg.out, "spec path (default <out-dir>/spec.json)");

  auto* verify = app.add_subcommand("verify", "certify a spec; exit 0 iff every mandatory check passes");
  verify->add_option("--spec", cfg.spec)->required();
  verify->add_option("--out", cfg.out, "certificate path (default next to the spec)");

  app.add_subcommand("kelvin-check", "exact Kelvin identity sweep on radial powers");
  auto* ktab = app.add_subcommand("kernel-table", "exact polyharmonicity of the fundamental solutions");
  ktab->add_option("--mmax", cfg.mmax);
  ktab->add_option("--nmax", cfg.nmax);

  app.add_subcommand("report", "all reference constructions plus kernel and Kelvin tables");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? kExitPass : kExitUsage;
  }
  cfg.command = app.get_subcommands().front()->get_name();
  if (!cfg.config_file.empty()) {
    std::ifstream in(cfg.config_file);
    if (!in) {
      err << "cannot open config " << cfg.config_file << "\n";
      return kExitUsage;
    }
    try {
      cfg.apply(Json::parse(in));
    } catch (const std::exception& e) {
      err << "bad config " << cfg.config_file << ": " << e.what() << "\n";
      return kExitUsage;
    }
  }
  return run(cfg, out, err);
}

}  // namespace polysing
