// Verification reports: per-axiom outcomes with the first failing witness.
#pragma once

#include <string>
#include <vector>

namespace morita {

enum class CheckKind { Axiom, Structural, Info };

struct CheckEntry {
  std::string axiom;
  bool pass = true;
  CheckKind kind = CheckKind::Axiom;
  std::string witness;   // first failing tuple, empty on pass
  double residual = 0.0; // worst numerical defect seen for this law
  std::string note;
};

struct Report {
  std::string subject;
  std::vector<CheckEntry> checks;

  bool passed() const {
    for (const auto& c : checks) {
      if (c.kind != CheckKind::Info && !c.pass) return false;
    }
    return true;
  }

  bool structural_failure() const {
    for (const auto& c : checks) {
      if (c.kind == CheckKind::Structural && !c.pass) return true;
    }
    return false;
  }

  const CheckEntry* first_failure() const {
    for (const auto& c : checks) {
      if (c.kind != CheckKind::Info && !c.pass) return &c;
    }
    return nullptr;
  }

  CheckEntry& add(const std::string& axiom, CheckKind kind = CheckKind::Axiom) {
    checks.push_back(CheckEntry{axiom, true, kind, "", 0.0, ""});
    return checks.back();
  }

  void merge(const Report& other) {
    for (const auto& c : other.checks) checks.push_back(c);
  }
};

// Records a failure only the first time; later witnesses are ignored so the
// reported tuple is the lexicographically first one scanned.
inline void fail_check(CheckEntry& e, const std::string& witness,
                       double residual = 0.0) {
  if (e.pass) {
    e.pass = false;
    e.witness = witness;
  }
  if (residual > e.residual) e.residual = residual;
}

inline void track_residual(CheckEntry& e, double residual, double tol,
                           const std::string& witness) {
  if (residual > e.residual) e.residual = residual;
  if (residual > tol && e.pass) {
    e.pass = false;
    e.witness = witness;
  }
}

}  // namespace morita
