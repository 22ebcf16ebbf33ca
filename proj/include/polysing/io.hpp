#pragma once

// SolutionSpec <-> JSON, content digests and sequence tables.

#include <openssl/evp.h>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>

#include "polysing/certificate.hpp"
#include "polysing/constructor.hpp"
#include "polysing/kelvin.hpp"
#include "polysing/potential.hpp"
#include "polysing/verify.hpp"

namespace polysing {

inline constexpr int kSpecFormatVersion = 1;

// Doubles are written with 17 significant digits (nlohmann's default), so a
// written spec reads back bit-identical.
inline Json spec_to_json(const SolutionSpec& s) {
  Json j;
  j["format"] = kSpecFormatVersion;
  j["m"] = s.params.m;
  j["n"] = s.params.n;
  j["kernel_normalization"] = s.params.A;
  j["C"] = s.C;
  j["A_used"] = s.A_used;
  j["theorem"] = to_string(s.theorem);
  j["phi"] = s.phi_preset;
  j["nonlinearity"] = {{"kind", to_string(s.nonlinearity.kind)},
                       {"lambda", rational_str(s.nonlinearity.lambda)},
                       {"tau", s.nonlinearity.tau}};
  j["eps_majorant"] = {{"ratio", s.eps_majorant_ratio}, {"sum", s.eps_majorant_sum}};
  j["bumps"] = Json::array();
  for (std::size_t k = 0; k < s.bumps.size(); ++k) {
    const auto& b = s.bumps[k];
    Json e{{"center", b.center}, {"log_radius", b.log_radius}, {"epsilon", b.epsilon}, {"log_mass", b.log_mass}};
    if (k < s.j_index.size()) e["j"] = s.j_index[k];
    j["bumps"].push_back(std::move(e));
  }
  return j;
}

inline Nonlinearity::Kind nonlinearity_kind_from_string(const std::string& k) {
  if (k == "power") return Nonlinearity::Kind::Power;
  if (k == "weighted-power") return Nonlinearity::Kind::WeightedPower;
  if (k == "exp-power") return Nonlinearity::Kind::ExpPower;
  throw std::invalid_argument("unknown nonlinearity kind '" + k + "'");
}

inline SolutionSpec spec_from_json(const Json& j) {
  if (j.value("format", 0) != kSpecFormatVersion) throw std::invalid_argument("spec JSON: unsupported format version");
  SolutionSpec s;
  s.params.m = j.at("m").get<int>();
  s.params.n = j.at("n").get<int>();
  s.params.A = j.at("kernel_normalization").get<double>();
  s.C = j.at("C").get<double>();
  s.A_used = j.at("A_used").get<double>();
  s.theorem = theorem_from_string(j.at("theorem").get<std::string>());
  s.phi_preset = j.value("phi", std::string{});
  const auto& nl = j.at("nonlinearity");
  s.nonlinearity.kind = nonlinearity_kind_from_string(nl.at("kind").get<std::string>());
  s.nonlinearity.lambda = parse_rational(nl.at("lambda").get<std::string>());
  s.nonlinearity.tau = nl.at("tau").get<double>();
  if (j.contains("eps_majorant")) {
    s.eps_majorant_ratio = j["eps_majorant"].at("ratio").get<double>();
    s.eps_majorant_sum = j["eps_majorant"].at("sum").get<double>();
  }
  for (const auto& e : j.at("bumps")) {
    BumpSpec b;
    b.center = e.at("center").get<std::vector<double>>();
    b.log_radius = e.at("log_radius").get<double>();
    b.epsilon = e.at("epsilon").get<double>();
    b.log_mass = e.at("log_mass").get<double>();
    s.bumps.push_back(std::move(b));
    if (e.contains("j")) s.j_index.push_back(e["j"].get<int>());
  }
  s.validate();
  return s;
}

inline std::string sha256_hex(const std::string& data) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  EVP_MD_CTX* ctx = EVP_MD_CTX_new();
  if (!ctx) throw std::runtime_error("sha256: EVP_MD_CTX_new failed");
  const bool ok = EVP_DigestInit_ex(ctx, EVP_sha256(), nullptr) == 1 &&
                  EVP_DigestUpdate(ctx, data.data(), data.size()) == 1 && EVP_DigestFinal_ex(ctx, md, &len) == 1;
  EVP_MD_CTX_free(ctx);
  if (!ok) throw std::runtime_error("sha256: digest failed");
  std::ostringstream os;
  for (unsigned int i = 0; i < len; ++i) os << std::hex << std::setw(2) << std::setfill('0') << static_cast<int>(md[i]);
  return os.str();
}

// Objects are key-sorted by nlohmann, so dump() is canonical.
inline std::string spec_digest(const SolutionSpec& s) { return sha256_hex(spec_to_json(s).dump()); }

inline SolutionSpec read_spec(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return spec_from_json(Json::parse(in));
}

inline void write_text(const std::string& path, const std::string& text) {
  // write-then-rename so concurrent jobs never leave a half-written file
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp);
    if (!out) throw std::runtime_error("cannot write " + tmp);
    out << text;
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot rename " + tmp + " to " + path);
}

// j, |x_j|, log r_j, r_j, eps_j, log M_j
inline std::string sequence_csv(const SolutionSpec& s) {
  std::ostringstream os;
  os << std::setprecision(17) << "j,xnorm,log_r,r,eps,log_M\n";
  for (std::size_t k = 0; k < s.bumps.size(); ++k) {
    const auto& b = s.bumps[k];
    os << (k < s.j_index.size() ? s.j_index[k] : static_cast<int>(k + 1)) << "," << b.center_norm() << ","
       << b.log_radius << "," << b.radius() << "," << b.epsilon << "," << b.log_mass << "\n";
  }
  return os.str();
}

// Full certificate of a constructed spec: admissibility, inequality, growth,
// upper consistency, slope and, for the exterior construction, the Kelvin side.
inline Certificate certify_spec(const SolutionSpec& spec, const VerifyConfig& cfg = {}) {
  Certificate cert = certify_all(spec, cfg);
  if (spec.theorem == TheoremTag::T1_17) cert.merge(exterior_growth_check(spec, cfg));
  cert.set_digest(spec_digest(spec));
  cert.set_seed(cfg.seed);
  cert.set_tolerance("quadrature_rel_tol", cfg.quad.rel_tol);
  cert.set_tolerance("residual_tol", cfg.residual_tol);
  cert.set_tolerance("growth_span", cfg.growth_span);
  cert.set_tolerance("slope_tol", cfg.slope_tol);
  cert.set_tolerance("samples_per_bump", cfg.samples_per_bump);
  return cert;
}

}  // namespace polysing
