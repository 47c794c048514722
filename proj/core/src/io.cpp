#include "mcoupler/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "mcoupler/error.hpp"
#include "mcoupler/units.hpp"

namespace mcoupler::io {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::vector<std::string_view> split(std::string_view line) {
    std::vector<std::string_view> out;
    size_t start = 0;
    while (true) {
        const size_t comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) break;
        start = comma + 1;
    }
    return out;
}

double parse_number(std::string_view cell, size_t line_no) {
    if (cell.empty()) return std::numeric_limits<double>::quiet_NaN();
    if (cell.front() == '+') cell.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
        fail(ErrorCode::InvalidInput, "line " + std::to_string(line_no) + ": '" +
                                          std::string(cell) + "' is not a number");
    }
    return v;
}

}  // namespace

std::optional<size_t> Table::column(const std::string& name) const {
    for (size_t i = 0; i < header.size(); ++i) {
        if (header[i] == name) return i;
    }
    return std::nullopt;
}

size_t Table::require_column(const std::string& name) const {
    auto c = column(name);
    require(c.has_value(), "CSV is missing column '" + name + "'");
    return *c;
}

Table read_csv(std::istream& in) {
    Table t;
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view view = trim(line);
        if (view.empty() || view.front() == '#') continue;
        const std::vector<std::string_view> cells = split(view);
        if (t.header.empty()) {
            for (std::string_view c : cells) {
                require(!c.empty(), "CSV header has an empty column name");
                t.header.emplace_back(c);
            }
            continue;
        }
        require(cells.size() == t.header.size(),
                "line " + std::to_string(line_no) + ": expected " +
                    std::to_string(t.header.size()) + " fields, got " +
                    std::to_string(cells.size()));
        std::vector<double> row;
        row.reserve(cells.size());
        for (std::string_view c : cells) row.push_back(parse_number(c, line_no));
        t.rows.push_back(std::move(row));
    }
    require(!t.header.empty(), "CSV has no header row");
    return t;
}

Table read_csv_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open '" + path.string() + "'");
    return read_csv(in);
}

std::vector<double> column_values(const Table& t, const std::string& name) {
    const size_t c = t.require_column(name);
    std::vector<double> out;
    out.reserve(t.rows.size());
    for (const auto& row : t.rows) out.push_back(row[c]);
    return out;
}

fit::GCurve gcurve_from_table(const Table& t) {
    const size_t phi = t.require_column("phi");
    const size_t g = t.require_column("g_hz");
    const std::optional<size_t> sigma = t.column("sigma_hz");
    fit::GCurve curve;
    for (const auto& row : t.rows) {
        fit::GPoint p{row[phi], row[g], std::nullopt};
        if (sigma) p.sigma_hz = row[*sigma];
        curve.points.push_back(p);
    }
    curve.validate();
    return curve;
}

fit::T1Curve t1curve_from_table(const Table& t, double omega_r_hz, double kappa_r_hz) {
    const size_t w = t.require_column("omega_c_hz");
    const size_t t1 = t.require_column("t1_s");
    fit::T1Curve curve;
    curve.omega_r_hz = omega_r_hz;
    curve.kappa_r_hz = kappa_r_hz;
    for (const auto& row : t.rows) curve.points.push_back({row[w], row[t1]});
    curve.validate();
    return curve;
}

metrics::RbRun rbrun_from_table(const Table& t, metrics::RbVariant variant) {
    const size_t m = t.require_column("m");
    const size_t s = t.require_column("survival_mean");
    const std::optional<size_t> sem = t.column("survival_sem");
    metrics::RbRun run;
    run.variant = variant;
    for (const auto& row : t.rows) {
        require(std::floor(row[m]) == row[m] && row[m] >= 0.0 && row[m] < 1e9,
                "sequence length must be a non-negative integer");
        metrics::RbPoint p{static_cast<int>(row[m]), row[s], std::nullopt};
        if (sem) p.sem = row[*sem];
        run.points.push_back(p);
    }
    run.validate();
    return run;
}

std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_gcurve_csv(std::ostream& out, const fit::GCurve& curve) {
    const bool sigma = curve.weighted();
    out << (sigma ? "phi,g_hz,sigma_hz\n" : "phi,g_hz\n");
    for (const fit::GPoint& p : curve.points) {
        out << format_number(p.phi) << ',' << format_number(p.g_hz);
        if (sigma) out << ',' << format_number(*p.sigma_hz);
        out << '\n';
    }
}

void write_t1curve_csv(std::ostream& out, const fit::T1Curve& curve) {
    out << "omega_c_hz,t1_s\n";
    for (const fit::T1Point& p : curve.points) {
        out << format_number(p.omega_c_hz) << ',' << format_number(p.t1_s) << '\n';
    }
}

void write_rbrun_csv(std::ostream& out, const metrics::RbRun& run) {
    const bool sem = !run.points.empty() && run.points.front().sem.has_value();
    out << (sem ? "m,survival_mean,survival_sem\n" : "m,survival_mean\n");
    for (const metrics::RbPoint& p : run.points) {
        out << p.m << ',' << format_number(p.survival);
        if (sem) out << ',' << format_number(p.sem.value_or(0.0));
        out << '\n';
    }
}

namespace {

using nlohmann::json;

const json& field(const json& obj, const char* key, const std::string& where) {
    require(obj.is_object() && obj.contains(key), where + ": missing '" + key + "'");
    return obj.at(key);
}

double number(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    require(v.is_number(), where + ": '" + key + "' must be a number");
    return v.get<double>();
}

int integer(const json& obj, const char* key, const std::string& where) {
    const json& v = field(obj, key, where);
    require(v.is_number_integer(), where + ": '" + key + "' must be an integer");
    return v.get<int>();
}

capnet::ElementRole parse_role(const std::string& s, const std::string& where) {
    if (s == "qubit1") return capnet::ElementRole::Qubit1;
    if (s == "qubit2") return capnet::ElementRole::Qubit2;
    if (s == "coupler") return capnet::ElementRole::Coupler;
    if (s == "other") return capnet::ElementRole::Other;
    fail(ErrorCode::InvalidInput, where + ": unknown role '" + s + "'");
}

}  // namespace

NetworkFile parse_network(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::InvalidInput, std::string("network file is not valid JSON: ") + e.what());
    }
    require(doc.is_object(), "network file must be a JSON object");
    const json& schema = field(doc, "schema", "network");
    require(schema.is_string() && schema.get<std::string>() == "mcoupler.network/1",
            "network: unsupported schema (expected \"mcoupler.network/1\")");

    NetworkFile out;
    const json& nodes = field(doc, "nodes", "network");
    require(nodes.is_array(), "network: 'nodes' must be an array");
    for (size_t i = 0; i < nodes.size(); ++i) {
        const std::string where = "nodes[" + std::to_string(i) + "]";
        const json& n = nodes[i];
        capnet::Node node;
        node.id = integer(n, "id", where);
        const json& kind = field(n, "kind", where);
        require(kind.is_string(), where + ": 'kind' must be a string");
        if (kind == "ground") {
            node.kind = capnet::NodeKind::Ground;
        } else if (kind == "pad") {
            node.kind = capnet::NodeKind::Pad;
        } else {
            fail(ErrorCode::InvalidInput, where + ": kind must be 'ground' or 'pad'");
        }
        if (n.contains("owner")) {
            require(n.at("owner").is_string(), where + ": 'owner' must be a string");
            node.owner = n.at("owner").get<std::string>();
        }
        out.network.nodes.push_back(node);
    }

    const json& caps = field(doc, "capacitances_ff", "network");
    require(caps.is_array(), "network: 'capacitances_ff' must be an array");
    for (size_t i = 0; i < caps.size(); ++i) {
        const std::string where = "capacitances_ff[" + std::to_string(i) + "]";
        out.network.caps.push_back({integer(caps[i], "a", where), integer(caps[i], "b", where),
                                    number(caps[i], "c_ff", where) * units::fF});
    }

    const json& elements = field(doc, "elements", "network");
    require(elements.is_array(), "network: 'elements' must be an array");
    for (size_t i = 0; i < elements.size(); ++i) {
        const std::string where = "elements[" + std::to_string(i) + "]";
        const json& e = elements[i];
        capnet::ElementDecl decl;
        const json& label = field(e, "label", where);
        require(label.is_string(), where + ": 'label' must be a string");
        decl.label = label.get<std::string>();
        const json& pads = field(e, "pads", where);
        require(pads.is_array(), where + ": 'pads' must be an array");
        for (const json& p : pads) {
            require(p.is_number_integer(), where + ": pads must be node ids");
            decl.pads.push_back(p.get<int>());
        }
        decl.e_j_hz = number(e, "e_j_hz", where);
        if (e.contains("r")) decl.asymmetry_r = number(e, "r", where);
        if (e.contains("role")) {
            require(e.at("role").is_string(), where + ": 'role' must be a string");
            decl.role = parse_role(e.at("role").get<std::string>(), where);
        }
        out.network.elements.push_back(decl);
    }

    if (doc.contains("connections")) {
        const json& conns = doc.at("connections");
        require(conns.is_array(), "network: 'connections' must be an array");
        for (size_t i = 0; i < conns.size(); ++i) {
            const std::string where = "connections[" + std::to_string(i) + "]";
            const json& c = conns[i];
            capnet::InterChipConnection conn;
            conn.node_a = integer(c, "a", where);
            conn.node_b = integer(c, "b", where);
            const json& kind = field(c, "kind", where);
            require(kind.is_string(), where + ": 'kind' must be a string");
            if (kind == "bump") {
                conn.kind = capnet::ConnectionKind::Bump;
            } else if (kind == "paddle") {
                conn.kind = capnet::ConnectionKind::Paddle;
            } else {
                fail(ErrorCode::InvalidInput, where + ": kind must be 'bump' or 'paddle'");
            }
            if (c.contains("area_um2")) conn.area_m2 = number(c, "area_um2", where) * units::um * units::um;
            if (c.contains("fringe_ff")) conn.fringe_f = number(c, "fringe_ff", where) * units::fF;
            if (conn.kind == capnet::ConnectionKind::Paddle) {
                require(conn.area_m2 > 0.0, where + ": paddle needs area_um2 > 0");
            }
            out.connections.push_back(conn);
        }
    }
    if (doc.contains("bump_height_m")) out.bump_height_m = number(doc, "bump_height_m", "network");
    out.network.validate();
    return out;
}

NetworkFile load_network(const std::filesystem::path& path) {
    std::ifstream in(path);
    require(in.good(), "cannot open network file '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_network(ss.str());
}

}  // namespace mcoupler::io
