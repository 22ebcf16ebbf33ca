#pragma once

// Structured pass/fail records. Each check carries a stable anchor naming the
// condition it certifies; the README maps anchors to the conditions in words.

#include <algorithm>
#include <cstdint>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace polysing {

using Json = nlohmann::json;

enum class Verdict { Pass, Fail, Inconclusive };

inline std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::Pass: return "pass";
    case Verdict::Fail: return "fail";
    case Verdict::Inconclusive: return "inconclusive";
  }
  return "?";
}

struct Check {
  std::string name;
  std::string anchor;
  Verdict verdict = Verdict::Inconclusive;
  Json evidence = Json::object();
  double tolerance = 0.0;
  bool mandatory = true;
  std::string note;

  bool passed() const { return verdict == Verdict::Pass; }
};

// A construction or verification step that cannot proceed; `anchor` names the
// violated condition.
class InadmissibleError : public std::invalid_argument {
 public:
  InadmissibleError(std::string anchor, const std::string& what)
      : std::invalid_argument(anchor + ": " + what), anchor_(std::move(anchor)) {}
  const std::string& anchor() const noexcept { return anchor_; }

 private:
  std::string anchor_;
};

class Certificate {
 public:
  Certificate() = default;
  explicit Certificate(std::string subject) : subject_(std::move(subject)) {}

  Check& add(Check c) {
    checks_.push_back(std::move(c));
    return checks_.back();
  }
  Check& add(std::string name, std::string anchor, bool ok, Json evidence = Json::object(), double tol = 0.0,
             bool mandatory = true) {
    return add(Check{std::move(name), std::move(anchor), ok ? Verdict::Pass : Verdict::Fail, std::move(evidence), tol,
                     mandatory, {}});
  }

  void merge(const Certificate& other) {
    for (const auto& c : other.checks_) checks_.push_back(c);
    for (auto it = other.tolerances_.begin(); it != other.tolerances_.end(); ++it) tolerances_[it.key()] = it.value();
  }

  void set_tolerance(const std::string& key, double v) { tolerances_[key] = v; }
  void set_digest(std::string d) { digest_ = std::move(d); }
  void set_subject(std::string s) { subject_ = std::move(s); }
  void set_seed(std::uint64_t s) { seed_ = s; }

  const std::string& subject() const { return subject_; }
  const std::string& digest() const { return digest_; }
  const std::vector<Check>& checks() const { return checks_; }

  bool overall() const {
    return std::all_of(checks_.begin(), checks_.end(), [](const Check& c) { return !c.mandatory || c.passed(); });
  }

  const Check* find(const std::string& name) const {
    for (const auto& c : checks_)
      if (c.name == name) return &c;
    return nullptr;
  }
  const Check* find_anchor(const std::string& anchor) const {
    for (const auto& c : checks_)
      if (c.anchor == anchor) return &c;
    return nullptr;
  }

  std::vector<std::string> failed() const {
    std::vector<std::string> out;
    for (const auto& c : checks_)
      if (c.mandatory && !c.passed()) out.push_back(c.name);
    return out;
  }

  Json to_json() const {
    Json j;
    j["subject"] = subject_;
    j["spec_digest"] = digest_;
    j["seed"] = seed_;
    j["overall"] = overall() ? "pass" : "fail";
    j["tolerance_ledger"] = tolerances_;
    j["checks"] = Json::array();
    for (const auto& c : checks_) {
      Json e;
      e["name"] = c.name;
      e["anchor"] = c.anchor;
      e["verdict"] = to_string(c.verdict);
      e["mandatory"] = c.mandatory;
      e["tolerance"] = c.tolerance;
      e["evidence"] = c.evidence;
      if (!c.note.empty()) e["note"] = c.note;
      j["checks"].push_back(std::move(e));
    }
    return j;
  }

  std::string summary_table() const {
    std::ostringstream os;
    std::size_t w = 5;
    for (const auto& c : checks_) w = std::max(w, c.name.size());
    os << subject_ << (digest_.empty() ? "" : "  [" + digest_.substr(0, 12) + "]") << "\n";
    for (const auto& c : checks_) {
      os << "  " << std::left << std::setw(static_cast<int>(w)) << c.name << "  " << std::setw(12) << to_string(c.verdict)
         << (c.mandatory ? "" : "(advisory) ") << c.anchor << "\n";
    }
    os << "  overall: " << (overall() ? "PASS" : "FAIL") << "\n";
    return os.str();
  }

 private:
  std::string subject_;
  std::string digest_;
  std::uint64_t seed_ = 0;
  std::vector<Check> checks_;
  Json tolerances_ = Json::object();
};

}  // namespace polysing
