#include "decimaxsum/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "json.hpp"

namespace dms {

using ojson = nlohmann::ordered_json;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double to_file_sense(Sense sense, double utility) {
    return sense == Sense::MinimizeCost ? -utility : utility;
}

ojson encode_real(double x) {
    if (std::isinf(x)) return x < 0 ? "-inf" : "inf";
    return x;
}

[[noreturn]] void fail(const std::string& where, const std::string& what) {
    throw ParseError("problem file: " + where + ": " + what, 0);
}

const ojson& member(const ojson& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) fail(where, "expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) fail(where, std::string("missing key \"") + key + "\"");
    return *it;
}

const ojson& array_member(const ojson& obj, const char* key, const std::string& where) {
    const auto& v = member(obj, key, where);
    if (!v.is_array()) fail(where + "." + key, "expected an array");
    return v;
}

std::size_t decode_index(const ojson& v, const std::string& where) {
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(where, "expected a non-negative integer");
    return v.get<std::size_t>();
}

double decode_real(const ojson& v, const std::string& where) {
    if (v.is_number()) return v.get<double>();
    if (v.is_string()) {
        const auto& s = v.get_ref<const std::string&>();
        if (s == "-inf") return -kInf;
        if (s == "inf") return kInf;
    }
    fail(where, "expected a number, \"-inf\" or \"inf\"");
}

std::string decode_label(const ojson& v, const std::string& where) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    fail(where, "expected a string label");
}

}  // namespace

std::string serialize_dcop(const Dcop& dcop) {
    ojson doc;
    doc["sense"] = dcop.sense == Sense::MinimizeCost ? "minimize" : "maximize";
    auto& vars = doc["variables"] = ojson::array();
    for (const auto& v : dcop.variables) {
        ojson entry;
        entry["id"] = v.id;
        entry["domain"] = v.labels;
        vars.push_back(std::move(entry));
    }
    auto& factors = doc["factors"] = ojson::array();
    for (const auto& f : dcop.factors) {
        ojson entry;
        entry["id"] = f.id;
        entry["scope"] = f.scope;
        auto& table = entry["table"] = ojson::array();
        for (double u : f.table) table.push_back(encode_real(to_file_sense(dcop.sense, u)));
        factors.push_back(std::move(entry));
    }
    auto& agents = doc["agents"] = ojson::object();
    for (std::size_t v = 0; v < dcop.agent_of.size(); ++v) agents[std::to_string(v)] = dcop.agent_of[v];
    return doc.dump() + "\n";
}

Dcop parse_dcop(std::string_view text) {
    ojson doc;
    try {
        doc = ojson::parse(text.begin(), text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("problem file: ") + e.what(), e.byte);
    }

    Dcop dcop;
    const auto& sense = member(doc, "sense", "$");
    if (sense == "maximize") {
        dcop.sense = Sense::MaximizeUtility;
    } else if (sense == "minimize") {
        dcop.sense = Sense::MinimizeCost;
    } else {
        fail("$.sense", "expected \"maximize\" or \"minimize\"");
    }

    const auto& vars = array_member(doc, "variables", "$");
    for (std::size_t i = 0; i < vars.size(); ++i) {
        const std::string where = "$.variables[" + std::to_string(i) + "]";
        Variable v;
        v.id = decode_index(member(vars[i], "id", where), where + ".id");
        const auto& domain = array_member(vars[i], "domain", where);
        for (std::size_t d = 0; d < domain.size(); ++d) {
            v.labels.push_back(decode_label(domain[d], where + ".domain[" + std::to_string(d) + "]"));
        }
        dcop.variables.push_back(std::move(v));
    }

    const auto& factors = array_member(doc, "factors", "$");
    for (std::size_t m = 0; m < factors.size(); ++m) {
        const std::string where = "$.factors[" + std::to_string(m) + "]";
        Factor f;
        f.id = decode_index(member(factors[m], "id", where), where + ".id");
        const auto& scope = array_member(factors[m], "scope", where);
        for (std::size_t k = 0; k < scope.size(); ++k) {
            f.scope.push_back(decode_index(scope[k], where + ".scope[" + std::to_string(k) + "]"));
        }
        const auto& table = array_member(factors[m], "table", where);
        f.table.reserve(table.size());
        for (std::size_t k = 0; k < table.size(); ++k) {
            const double x = decode_real(table[k], where + ".table[" + std::to_string(k) + "]");
            f.table.push_back(to_file_sense(dcop.sense, x));
        }
        dcop.factors.push_back(std::move(f));
    }

    const auto& agents = member(doc, "agents", "$");
    if (!agents.is_object()) fail("$.agents", "expected an object");
    dcop.agent_of.assign(dcop.variables.size(), std::string{});
    std::size_t covered = 0;
    for (const auto& [key, value] : agents.items()) {
        std::size_t var = 0;
        try {
            std::size_t used = 0;
            var = std::stoul(key, &used);
            if (used != key.size()) throw std::invalid_argument(key);
        } catch (const std::exception&) {
            fail("$.agents", "key \"" + key + "\" is not a variable id");
        }
        if (var >= dcop.variables.size()) fail("$.agents", "unknown variable " + key);
        dcop.agent_of[var] = decode_label(value, "$.agents." + key);
        ++covered;
    }
    if (covered != dcop.variables.size()) fail("$.agents", "agent map is not total over variables");

    require_valid(dcop);
    return dcop;
}

Dcop load_dcop(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_dcop(buf.str());
}

void save_dcop(const Dcop& dcop, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << serialize_dcop(dcop);
}

}  // namespace dms
