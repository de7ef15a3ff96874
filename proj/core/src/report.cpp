#include "fluctlab/report.hpp"

#include "fluctlab/io.hpp"
#include "fluctlab/manifest.hpp"

#include <json.hpp>

#include <string>

namespace fluctlab::cli {

namespace {

using ordered_json = nlohmann::ordered_json;

std::string cell_text(const ordered_json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "yes" : "no";
    if (v.is_number()) return format_double(v.get<double>());
    return v.dump();
}

void render_table(std::string& md, const std::string& title,
                  const ordered_json& columns, const ordered_json& rows) {
    md += "\n## " + title + "\n\n|";
    for (const auto& c : columns) md += " " + cell_text(c) + " |";
    md += "\n|";
    for (std::size_t i = 0; i < columns.size(); ++i) md += " --- |";
    md += "\n";
    for (const auto& row : rows) {
        md += "|";
        for (const auto& cell : row) md += " " + cell_text(cell) + " |";
        md += "\n";
    }
}

}  // namespace

void emit_report(const std::string& dir) {
    const auto manifest = load_manifest(dir);
    const auto bad = verify_artifacts(manifest, dir);
    if (!bad.empty()) {
        std::string msg = "integrity check failed:";
        for (const auto& b : bad) msg += " " + b;
        throw IoError(msg);
    }

    std::string md = "# fluctlab run report\n\n";
    md += "- command: `" + manifest.command + "`\n";
    md += "- version: " + manifest.version + "\n";
    md += "- started: " + manifest.started + "\n";
    md += "- finished: " + manifest.finished + "\n";
    md += "- artifacts: " + std::to_string(manifest.artifacts.size()) + "\n";

    const std::string summary_path = dir + "/summary.json";
    if (file_exists(summary_path)) {
        ordered_json summary;
        try {
            summary = ordered_json::parse(read_text(summary_path));
        } catch (const std::exception& e) {
            throw IoError(std::string("summary.json is not valid JSON: ") +
                          e.what());
        }

        if (summary.contains("verdicts") && !summary["verdicts"].empty()) {
            md += "\n## Verdicts\n\n| criterion | value | band | pass |\n"
                  "| --- | --- | --- | --- |\n";
            for (const auto& v : summary["verdicts"]) {
                std::string band = "-";
                if (v.contains("band") && v["band"].is_array() &&
                    v["band"].size() == 2) {
                    band = "[" + cell_text(v["band"][0]) + ", " +
                           cell_text(v["band"][1]) + "]";
                }
                md += "| " + v.value("criterion", std::string("?")) + " | " +
                      cell_text(v.contains("value") ? v["value"]
                                                    : ordered_json()) +
                      " | " + band + " | " +
                      (v.value("pass", false) ? std::string("yes")
                                              : std::string("no")) +
                      " |\n";
            }
        }

        if (summary.contains("tables")) {
            for (const auto& t : summary["tables"])
                render_table(md, t.value("title", std::string("table")),
                             t["columns"], t["rows"]);
        }

        if (summary.contains("figures")) {
            md += "\n## Figures\n\n";
            for (const auto& f : summary["figures"]) {
                const std::string name = f.value("name", std::string("figure"));
                std::string dat = "#";
                for (const auto& c : f["columns"]) dat += " " + cell_text(c);
                dat += "\n";
                for (const auto& row : f["rows"]) {
                    bool first = true;
                    for (const auto& cell : row) {
                        if (!first) dat += " ";
                        dat += cell_text(cell);
                        first = false;
                    }
                    dat += "\n";
                }
                const std::string fname = "fig_" + name + ".dat";
                write_text(dir + "/" + fname, dat);
                md += "- `" + fname + "`\n";
            }
        }
    }

    write_text(dir + "/report.md", md);
}

}  // namespace fluctlab::cli
