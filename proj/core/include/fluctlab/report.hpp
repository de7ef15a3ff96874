#pragma once

#include <string>

namespace fluctlab::cli {

/// Renders `report.md` plus gnuplot-ready `fig_<name>.dat` files from a
/// completed run directory. The directory must contain manifest.json whose
/// artifacts all pass the hash check (IoError otherwise, naming offenders);
/// a summary.json written by the campaign subcommands supplies the verdicts,
/// tables and figures. A run without summary.json renders a header-only
/// report (zero tables).
void emit_report(const std::string& dir);

}  // namespace fluctlab::cli
