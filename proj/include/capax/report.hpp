#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace capax {

using Cell = std::variant<std::string, double, long long, bool>;

struct Table {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
};

enum class Format { csv, json };

// 17 significant digits, "inf" / "-inf" / "nan" literals
std::string format_number(double v);
// CSV with header and RFC 4180 quoting, or a JSON array of objects
std::string emit_report(const Table& t, Format f);

struct RunConfig {
    std::string command;
    std::string domain;   // path to a domain JSON file
    std::string domain2;  // outer domain for the axioms command
    int K = 0;            // 0 -> smallest truncation that carries the slope, plus 2
    int m = 0;            // quadrature grid, 0 -> 4K
    int kmax = 10;
    double tol = 1e-6;
    unsigned long long seed = 0;
    double slope = 0.0;   // 0 -> chosen from kmax
    Format format = Format::csv;
    std::string out;      // empty -> stdout
    double width = 1e-3;  // admissible collar width for orbits and morse
    double eps = 0.0;     // 0 -> 2 * width
    double forcingAmp = 0.0;
    int forcingMode = 0;  // 0 -> all modes 1..K on every axis
    std::vector<double> scalings{0.5, 2.0, 3.0};

    void validate() const;
};

// keys mirror the long flag names; unknown keys are rejected
void apply_config(RunConfig& cfg, const nlohmann::json& j);
nlohmann::json provenance(const RunConfig& cfg);

struct RunOutcome {
    int exitCode = 0;
    std::string report;
    std::string error;  // one line, "error: kind=... reason=..."
};

// 0 success, 1 verification FAIL, 2 input error, 3 numerical degeneracy
RunOutcome run(const RunConfig& cfg);

}  // namespace capax
