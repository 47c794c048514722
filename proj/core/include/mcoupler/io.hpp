#pragma once

// Text formats shared by the library and the command-line tool.
//
// CSV: comma separated, header row required, '.' decimal point, no locale
// variants. Blank lines and lines starting with '#' are ignored. An empty
// cell reads as NaN (a missing value); the curve readers reject it.
//   g curve   phi,g_hz[,sigma_hz]
//   T1 curve  omega_c_hz,t1_s
//   RB run    m,survival_mean[,survival_sem]
//
// Network files are JSON; see docs/formats.md.

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mcoupler/capnet.hpp"
#include "mcoupler/fit.hpp"
#include "mcoupler/gate_metrics.hpp"

namespace mcoupler::io {

/// Parsed CSV with named columns; every cell is a number or NaN when empty.
struct Table {
    std::vector<std::string> header;
    std::vector<std::vector<double>> rows;

    std::optional<size_t> column(const std::string& name) const;
    size_t require_column(const std::string& name) const;
};

Table read_csv(std::istream& in);
Table read_csv_file(const std::filesystem::path& path);

fit::GCurve gcurve_from_table(const Table& t);
fit::T1Curve t1curve_from_table(const Table& t, double omega_r_hz, double kappa_r_hz);
metrics::RbRun rbrun_from_table(const Table& t, metrics::RbVariant variant);
std::vector<double> column_values(const Table& t, const std::string& name);

void write_gcurve_csv(std::ostream& out, const fit::GCurve& curve);
void write_t1curve_csv(std::ostream& out, const fit::T1Curve& curve);
void write_rbrun_csv(std::ostream& out, const metrics::RbRun& run);

/// Shortest round-trippable decimal representation.
std::string format_number(double v);

struct NetworkFile {
    capnet::CapNetwork network;
    /// Connection sites with their declared kind; a design may override it.
    std::vector<capnet::InterChipConnection> connections;
    std::optional<double> bump_height_m;
};

NetworkFile parse_network(const std::string& json_text);
NetworkFile load_network(const std::filesystem::path& path);

}  // namespace mcoupler::io
