#pragma once

#include <cstdio>
#include <string>
#include <vector>

namespace voronoi {

struct Check {
  std::string name;
  bool ok = false;
  double value = 0.0;
  std::string detail;
};

enum class Verdict { holds, violated, not_applicable };

inline const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::holds:
      return "holds";
    case Verdict::violated:
      return "violated";
    case Verdict::not_applicable:
      return "hypotheses not met";
  }
  return "?";
}

/// Outcome of a verifier. A failed hypothesis makes the theorem silent
/// (not_applicable); a failed conclusion under satisfied hypotheses is a
/// violation.
struct Report {
  std::string title;
  std::vector<Check> hypotheses;
  std::vector<Check> conclusions;
  std::vector<std::string> notes;

  void hypothesis(std::string name, bool ok, double value, std::string detail = {}) {
    hypotheses.push_back({std::move(name), ok, value, std::move(detail)});
  }
  void conclusion(std::string name, bool ok, double value, std::string detail = {}) {
    conclusions.push_back({std::move(name), ok, value, std::move(detail)});
  }

  [[nodiscard]] bool hypotheses_hold() const {
    for (const auto& c : hypotheses)
      if (!c.ok) return false;
    return true;
  }
  [[nodiscard]] bool conclusions_hold() const {
    for (const auto& c : conclusions)
      if (!c.ok) return false;
    return true;
  }
  [[nodiscard]] Verdict verdict() const {
    if (!hypotheses_hold()) return Verdict::not_applicable;
    return conclusions_hold() ? Verdict::holds : Verdict::violated;
  }
  [[nodiscard]] const Check* find(const std::string& name) const {
    for (const auto* list : {&hypotheses, &conclusions})
      for (const auto& c : *list)
        if (c.name == name) return &c;
    return nullptr;
  }

  [[nodiscard]] std::string render() const {
    std::string out = "== " + title + "\n";
    auto line = [&out](const char* role, const Check& c) {
      char buf[64];
      std::snprintf(buf, sizeof buf, "%.9g", c.value);
      out += "  ";
      out += role;
      out += c.ok ? " [ok]   " : " [FAIL] ";
      out += c.name + " = " + buf;
      if (!c.detail.empty()) out += "  (" + c.detail + ")";
      out += "\n";
    };
    for (const auto& c : hypotheses) line("hypothesis", c);
    for (const auto& c : conclusions) line("conclusion", c);
    for (const auto& n : notes) out += "  note: " + n + "\n";
    out += std::string("  verdict: ") + to_string(verdict()) + "\n";
    return out;
  }
};

}  // namespace voronoi
