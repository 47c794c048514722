#include "config.hpp"

#include <fstream>
#include <sstream>

#include "mcoupler/capnet.hpp"
#include "mcoupler/error.hpp"

namespace mcoupler::app {

namespace {

using nlohmann::json;

const json& section(const json& obj, const char* key, const std::string& where) {
    require(obj.contains(key), where + ": missing '" + key + "'");
    const json& v = obj.at(key);
    require(v.is_object(), where + ": '" + key + "' must be an object");
    return v;
}

double number(const json& obj, const char* key, const std::string& where) {
    require(obj.contains(key), where + ": missing '" + key + "'");
    const json& v = obj.at(key);
    require(v.is_number(), where + "." + key + " must be a number");
    return v.get<double>();
}

std::optional<double> optional_number(const json& obj, const char* key, const std::string& where) {
    if (!obj.contains(key) || obj.at(key).is_null()) return std::nullopt;
    return number(obj, key, where);
}

TransmonParams parse_qubit(const json& q, const std::string& where) {
    require(q.is_object(), where + " must be an object");
    const double e_c = number(q, "e_c_hz", where);
    std::string label = q.contains("label") && q.at("label").is_string()
                            ? q.at("label").get<std::string>()
                            : std::string();
    const std::optional<double> e_j = optional_number(q, "e_j_hz", where);
    const std::optional<double> f = optional_number(q, "frequency_hz", where);
    require(e_j || f, where + ": needs 'e_j_hz' or 'frequency_hz'");
    TransmonParams t;
    if (e_j) {
        t = TransmonParams{*e_j, e_c, label, f};
    } else {
        require(*f > 0.0 && e_c > 0.0, where + ": frequency_hz and e_c_hz must be > 0");
        t = TransmonParams::from_frequency(*f, e_c, label);
    }
    try {
        t.validate();
    } catch (const Error& e) {
        fail(e.code(), where + ": " + e.what());
    }
    return t;
}

PadConfig parse_pad_config(const json& c, const std::string& where) {
    require(c.contains("config") && c.at("config").is_string(),
            where + ".config must be \"asymmetric\" or \"symmetric\"");
    const std::string s = c.at("config").get<std::string>();
    if (s == "asymmetric") return PadConfig::Asymmetric;
    if (s == "symmetric") return PadConfig::Symmetric;
    fail(ErrorCode::InvalidInput, where + ".config must be \"asymmetric\" or \"symmetric\"");
}

std::string read_file(const std::filesystem::path& path, const std::string& what) {
    std::ifstream in(path);
    require(in.good(), "cannot open " + what + " '" + path.string() + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

DeviceConfig parse_device_config(const std::string& json_text, const std::filesystem::path& base_dir) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        fail(ErrorCode::InvalidInput, std::string("config is not valid JSON: ") + e.what());
    }
    require(doc.is_object(), "config must be a JSON object");
    require(doc.contains("schema") && doc.at("schema") == "mcoupler.device/1",
            "config: 'schema' must be \"mcoupler.device/1\"");

    DeviceConfig cfg;
    cfg.resolved = doc;

    require(doc.contains("qubits"), "config: missing 'qubits'");
    const json& qubits = doc.at("qubits");
    require(qubits.is_array() && qubits.size() == 2, "config.qubits must list exactly two qubits");
    cfg.q1 = parse_qubit(qubits[0], "config.qubits[0]");
    cfg.q2 = parse_qubit(qubits[1], "config.qubits[1]");

    const json& c = section(doc, "coupler", "config");
    cfg.coupler.e_jc_hz = number(c, "e_jc_hz", "config.coupler");
    cfg.coupler.r = number(c, "r", "config.coupler");
    cfg.coupler.e_cc_hz = number(c, "e_cc_hz", "config.coupler");
    cfg.coupler.config = parse_pad_config(c, "config.coupler");
    try {
        cfg.coupler.validate();
    } catch (const Error& e) {
        fail(e.code(), std::string("config.coupler: ") + e.what());
    }

    const bool has_couplings = doc.contains("couplings");
    const bool has_network = doc.contains("network");
    require(has_couplings != has_network,
            "config: exactly one of 'couplings' or 'network' must be present");
    if (has_couplings) {
        const json& g = section(doc, "couplings", "config");
        cfg.couplings = CouplingSet{number(g, "g12_hz", "config.couplings"),
                                    number(g, "g1c_hz", "config.couplings"),
                                    number(g, "g2c_hz", "config.couplings")};
    } else {
        const json& n = section(doc, "network", "config");
        require(n.contains("path") && n.at("path").is_string(),
                "config.network.path must be a string");
        NetworkRef ref;
        ref.path = base_dir / n.at("path").get<std::string>();
        const std::string text = read_file(ref.path, "network file");
        try {
            ref.file = io::parse_network(text);
        } catch (const Error& e) {
            fail(e.code(), ref.path.string() + ": " + e.what());
        }
        ref.document = json::parse(text);
        const std::optional<double> h = optional_number(n, "bump_height_m", "config.network");
        require(h || ref.file.bump_height_m,
                "config.network: 'bump_height_m' is needed (not set in the network file either)");
        ref.bump_height_m = h ? *h : *ref.file.bump_height_m;
        require(ref.bump_height_m > 0.0, "config.network.bump_height_m must be > 0");
        cfg.resolved["network"]["resolved_path"] = ref.path.string();
        cfg.resolved["network"]["bump_height_m"] = ref.bump_height_m;
        cfg.resolved["network"]["document"] = ref.document;
        cfg.network = std::move(ref);
    }

    if (doc.contains("purcell")) {
        const json& p = section(doc, "purcell", "config");
        PurcellParams pp;
        pp.omega_r_hz = number(p, "omega_r_hz", "config.purcell");
        pp.kappa_r_hz = number(p, "kappa_r_hz", "config.purcell");
        pp.g_rc_hz = optional_number(p, "g_rc_hz", "config.purcell").value_or(0.0);
        try {
            pp.validate();
        } catch (const Error& e) {
            fail(e.code(), std::string("config.purcell: ") + e.what());
        }
        cfg.purcell = pp;
    }
    if (doc.contains("gate_timing")) {
        const json& t = section(doc, "gate_timing", "config");
        metrics::GateTiming gt{number(t, "t_flat_s", "config.gate_timing"),
                               number(t, "t_pad_s", "config.gate_timing")};
        gt.validate();
        cfg.gate_timing = gt;
    }
    if (doc.contains("coherence")) {
        const json& t = section(doc, "coherence", "config");
        const std::string w = "config.coherence";
        CoherenceInput ci;
        ci.t1_q1_s = number(t, "t1_q1_s", w);
        ci.t2s_q1_s = number(t, "t2s_q1_s", w);
        ci.t1_q2_s = optional_number(t, "t1_q2_s", w);
        ci.t2s_q2_s = optional_number(t, "t2s_q2_s", w);
        ci.t1_q2_mod_s = number(t, "t1_q2_mod_s", w);
        ci.t2s_q2_mod_s = number(t, "t2s_q2_mod_s", w);
        require(ci.t1_q2_s.has_value() == ci.t2s_q2_s.has_value(),
                w + ": give both or neither of 't1_q2_s' and 't2s_q2_s'");
        cfg.coherence = ci;
    }
    if (doc.contains("fit")) {
        const json& f = section(doc, "fit", "config");
        if (f.contains("r_convention")) {
            const json& rc = f.at("r_convention");
            require(rc == "le1" || rc == "ge1", "config.fit.r_convention must be \"le1\" or \"ge1\"");
            cfg.r_convention = rc == "le1" ? fit::AsymmetryConvention::AtMostOne
                                           : fit::AsymmetryConvention::AtLeastOne;
        }
    }

    // Fail at load time rather than in the middle of a command.
    cfg.model().validate();
    return cfg;
}

DeviceConfig load_device_config(const std::filesystem::path& path) {
    return parse_device_config(read_file(path, "config"), path.parent_path());
}

CouplerModel DeviceConfig::model() const {
    CouplerModel m;
    m.q1 = q1;
    m.q2 = q2;
    m.coupler = coupler;
    if (couplings) {
        m.couplings = *couplings;
        return m;
    }
    const capnet::CapNetwork& net = network->file.network;
    const capnet::MaxwellMatrix cm =
        capnet::build_matrix(net, network->file.connections, network->bump_height_m);
    const capnet::ElementEnergies en = capnet::reduce_to_energies(cm, net.elements);
    const std::string& l1 = net.element(capnet::ElementRole::Qubit1).label;
    const std::string& l2 = net.element(capnet::ElementRole::Qubit2).label;
    const std::string& lc = net.element(capnet::ElementRole::Coupler).label;
    const TransmonParams c = coupler_as_transmon(coupler);
    m.couplings.g12_hz = coupling_from_energy(en.coupling(l1, l2), q1, q2);
    m.couplings.g1c_hz = coupling_from_energy(en.coupling(l1, lc), q1, c);
    m.couplings.g2c_hz = coupling_from_energy(en.coupling(l2, lc), q2, c);
    return m;
}

}  // namespace mcoupler::app
