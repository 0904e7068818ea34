#pragma once

#include <string>
#include <vector>

namespace preassess {

enum class Verdict {
  Match,
  /// The printed value does not reproduce; the computed value agrees with
  /// an independent enumeration oracle.
  KnownDivergence,
  Mismatch,
};

std::string_view to_string(Verdict v);

struct ReproCheck {
  std::string name;
  std::string source;    // where the printed value appears, e.g. "Table 6"
  std::string printed;   // value as printed, "" when the check is structural
  std::string computed;
  Verdict verdict = Verdict::Mismatch;
  std::string note;
};

struct ReproReport {
  std::vector<ReproCheck> checks;

  bool ok() const;
};

/// Directory holding the shipped fixtures (compiled-in default).
std::string default_fixture_dir();

/// Recomputes every published number from the fixtures in `fixture_dir`.
/// With `all_table6_cells` every entropy/info-gain cell is listed, not just
/// the pinned and divergent ones. Throws FixtureMissing.
ReproReport reproduce_paper(const std::string& fixture_dir, bool all_table6_cells = false);

}  // namespace preassess
