#include "holo/cli.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "holo/constructor.hpp"
#include "holo/coupling.hpp"
#include "holo/errors.hpp"

namespace holo {

namespace {

namespace fs = std::filesystem;
using njson = nlohmann::ordered_json;

constexpr double kPi = 3.14159265358979323846;

std::string trim(const std::string& s) {
    const char* ws = " \t\r\n";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

int to_int(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": integer expected, got '" + s + "'");
    }
}

double to_dbl(const std::string& key, const std::string& s) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ConfigError(key + ": number expected, got '" + s + "'");
    }
}

bool to_bool(const std::string& key, const std::string& s) {
    if (s == "true") return true;
    if (s == "false") return false;
    throw ConfigError(key + ": true or false expected, got '" + s + "'");
}

Rat to_rat(const std::string& key, const std::string& s) {
    try {
        return Rat::parse(s);
    } catch (const Error& e) {
        throw ConfigError(key + ": " + e.what());
    }
}

std::vector<int> int_list(const std::string& key, const std::string& s) {
    std::vector<int> out;
    for (const auto& piece : split(s, ',')) out.push_back(to_int(key, trim(piece)));
    return out;
}

std::vector<double> dbl_list(const std::string& key, const std::string& s) {
    std::vector<double> out;
    for (const auto& piece : split(s, ',')) out.push_back(to_dbl(key, trim(piece)));
    return out;
}

std::vector<Rat> rat_list(const std::string& key, const std::string& s) {
    std::vector<Rat> out;
    for (const auto& piece : split(s, ',')) out.push_back(to_rat(key, trim(piece)));
    return out;
}

const std::array<const char*, 5> kFamilyKinds = {
    "diffusion", "lattice-diffusion", "advection-diffusion", "wave",
    "heterogeneous-diffusion"};

PdeFamily family_from_parts(const std::string& kind, bool perturbed,
                            int c_order, bool lattice) {
    if (kind == "diffusion") return PdeFamily::diffusion();
    if (kind == "lattice-diffusion") return PdeFamily::lattice_diffusion();
    if (kind == "advection-diffusion")
        return PdeFamily::advection_diffusion(perturbed, c_order);
    if (kind == "wave") return PdeFamily::wave1(perturbed, lattice);
    if (kind == "heterogeneous-diffusion")
        return PdeFamily::heterogeneous_diffusion();
    throw ConfigError("unknown family kind '" + kind + "'");
}

PdeFamily family_from(const ToolConfig::Family& f) {
    PdeFamily fam = family_from_parts(f.kind, f.perturbed, f.c_order, false);
    if (f.theta) fam = fam.with_theta(ParamPoly(*f.theta));
    return fam;
}

double rat_dbl(const Rat& r) { return r.raw().get_d(); }

} // namespace

ToolConfig parse_config(std::istream& in) {
    enum class Sec { None, Family, Orders, Simulation, Verification, Output };
    ToolConfig cfg;
    Sec sec = Sec::None;
    bool orders_gamma_set = false;
    std::string raw;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto hash = raw.find('#');
        const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
        if (line.empty()) continue;
        const std::string where = "line " + std::to_string(lineno);
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError(where + ": unterminated section header");
            const std::string name = trim(line.substr(1, line.size() - 2));
            if (name == "family") {
                sec = Sec::Family;
                if (!cfg.family) cfg.family.emplace();
            } else if (name == "orders") {
                sec = Sec::Orders;
                if (!cfg.orders) cfg.orders.emplace();
            } else if (name == "simulation") {
                sec = Sec::Simulation;
                if (!cfg.sim) cfg.sim.emplace();
            } else if (name == "verification") {
                sec = Sec::Verification;
                if (!cfg.verify) cfg.verify.emplace();
            } else if (name == "output") {
                sec = Sec::Output;
            } else {
                throw ConfigError(where + ": unknown section [" + name + "]");
            }
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(where + ": expected key = value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty())
            throw ConfigError(where + ": empty key or value");

        switch (sec) {
        case Sec::None:
            throw ConfigError(where + ": key outside any section");
        case Sec::Family: {
            auto& f = *cfg.family;
            if (key == "kind") {
                if (std::find(kFamilyKinds.begin(), kFamilyKinds.end(), val) ==
                    kFamilyKinds.end())
                    throw ConfigError(where + ": unknown family kind '" + val + "'");
                f.kind = val;
            } else if (key == "theta") {
                f.theta = to_rat(key, val);
            } else if (key == "perturbed") {
                f.perturbed = to_bool(key, val);
            } else if (key == "advection_order") {
                f.c_order = to_int(key, val);
                if (f.c_order < 1 || f.c_order > 8)
                    throw ConfigError(where + ": advection_order out of range");
            } else {
                throw ConfigError(where + ": unknown [family] key '" + key + "'");
            }
            break;
        }
        case Sec::Orders: {
            auto& o = *cfg.orders;
            int v = to_int(key, val);
            if (key == "gamma") {
                o.g = v;
                orders_gamma_set = true;
            } else if (key == "alpha") {
                o.al = v;
            } else if (key == "a") {
                o.a = v;
            } else {
                throw ConfigError(where + ": unknown [orders] key '" + key + "'");
            }
            if (v < 1 || v > 32)
                throw ConfigError(where + ": truncation order " + val +
                                  " outside 1..32");
            break;
        }
        case Sec::Simulation: {
            auto& s = *cfg.sim;
            if (key == "experiment") s.experiment = val;
            else if (key == "solver") s.solver = val;
            else if (key == "initial") s.initial = val;
            else if (key == "n") s.n = to_int(key, val);
            else if (key == "coarse_n") s.coarse_n = to_int(key, val);
            else if (key == "x_lo") s.x_lo = to_dbl(key, val);
            else if (key == "x_hi") s.x_hi = to_dbl(key, val);
            else if (key == "dt") s.dt = to_dbl(key, val);
            else if (key == "coarse_dt") s.coarse_dt = to_dbl(key, val);
            else if (key == "T") s.T = to_dbl(key, val);
            else if (key == "cadence") s.cadence = to_int(key, val);
            else if (key == "alpha") s.alpha = to_dbl(key, val);
            else if (key == "a") s.a = to_dbl(key, val);
            else if (key == "k") s.k = to_dbl(key, val);
            else if (key == "phi") s.phi = to_dbl(key, val);
            else if (key == "element_width") s.element_width = to_dbl(key, val);
            else if (key == "cell_nodes") s.cell_nodes = to_int(key, val);
            else if (key == "modes") s.modes = dbl_list(key, val);
            else throw ConfigError(where + ": unknown [simulation] key '" + key + "'");
            break;
        }
        case Sec::Verification: {
            auto& v = *cfg.verify;
            if (key == "ensembles") v.ensembles = int_list(key, val);
            else if (key == "gammas") v.gammas = rat_list(key, val);
            else if (key == "thetas") v.thetas = rat_list(key, val);
            else if (key == "degree") v.degree = to_int(key, val);
            else if (key == "trials") v.trials = to_int(key, val);
            else if (key == "commute_max") v.commute_max = to_int(key, val);
            else if (key == "dichotomy_ensembles") v.dichotomy_ensembles = int_list(key, val);
            else if (key == "cell_nodes") v.cell_nodes = to_int(key, val);
            else if (key == "near_zero_tol") v.near_zero_tol = to_dbl(key, val);
            else if (key == "seed") v.seed = static_cast<unsigned>(to_int(key, val));
            else throw ConfigError(where + ": unknown [verification] key '" + key + "'");
            break;
        }
        case Sec::Output: {
            if (key == "dir") cfg.out_dir = val;
            else throw ConfigError(where + ": unknown [output] key '" + key + "'");
            break;
        }
        }
    }

    if (cfg.orders && !orders_gamma_set)
        throw ConfigError("[orders] requires a gamma truncation order");
    if (cfg.family && cfg.family->kind.empty())
        throw ConfigError("[family] requires a kind");
    if (cfg.sim) {
        const auto& s = *cfg.sim;
        if (s.cadence < 1) throw ConfigError("cadence must be at least 1");
        if (s.cell_nodes < 3) throw ConfigError("cell_nodes must be at least 3");
    }
    if (cfg.verify) {
        const auto& v = *cfg.verify;
        if (v.ensembles.empty() || v.gammas.empty() || v.thetas.empty())
            throw ConfigError(
                "[verification] requires ensembles, gammas and thetas");
        for (int n : v.ensembles)
            if (n < 2) throw ConfigError("ensembles entries must be at least 2");
        for (int n : v.dichotomy_ensembles)
            if (n < 1) throw ConfigError("dichotomy_ensembles entries must be positive");
        if (v.degree < 2) throw ConfigError("degree must be at least 2");
        if (v.trials < 1) throw ConfigError("trials must be at least 1");
        if (v.commute_max < 2) throw ConfigError("commute_max must be at least 2");
        if (v.cell_nodes < 8) throw ConfigError("cell_nodes must be at least 8");
        if (!(v.near_zero_tol > 0)) throw ConfigError("near_zero_tol must be positive");
    }
    return cfg;
}

ToolConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot read config '" + path + "'");
    return parse_config(in);
}

const std::map<std::string, std::string>& preset_table() {
    static const std::map<std::string, std::string> table = {
        {"diffusion-third",
         "# Third-order closure of plain diffusion, tuning kept symbolic.\n"
         "[family]\n"
         "kind = diffusion\n"
         "[orders]\n"
         "gamma = 3\n"
         "[output]\n"
         "dir = out/diffusion-third\n"},
        {"diffusion-sixth",
         "# Sixth-order closure of plain diffusion.\n"
         "[family]\n"
         "kind = diffusion\n"
         "[orders]\n"
         "gamma = 6\n"
         "[output]\n"
         "dir = out/diffusion-sixth\n"},
        {"diffusion-ninth",
         "# Ninth-order closure of plain diffusion, the longest certified run.\n"
         "[family]\n"
         "kind = diffusion\n"
         "[orders]\n"
         "gamma = 9\n"
         "[output]\n"
         "dir = out/diffusion-ninth\n"},
        {"wave-second",
         "# Second-order closure of the first-order wave family.\n"
         "[family]\n"
         "kind = wave\n"
         "[orders]\n"
         "gamma = 2\n"
         "[output]\n"
         "dir = out/wave-second\n"},
        {"wave-fifth",
         "# Fifth-order closure of the first-order wave family.\n"
         "[family]\n"
         "kind = wave\n"
         "[orders]\n"
         "gamma = 5\n"
         "[output]\n"
         "dir = out/wave-fifth\n"},
        {"het-third",
         "# Third-order closure over a microscale diffusivity, three powers\n"
         "# of the modulation amplitude.\n"
         "[family]\n"
         "kind = heterogeneous-diffusion\n"
         "[orders]\n"
         "gamma = 3\n"
         "a = 3\n"
         "[output]\n"
         "dir = out/het-third\n"},
        {"het-seventh",
         "# Seventh-order heterogeneous closure; feeds the dispersion table.\n"
         "[family]\n"
         "kind = heterogeneous-diffusion\n"
         "[orders]\n"
         "gamma = 7\n"
         "a = 3\n"
         "[output]\n"
         "dir = out/het-seventh\n"},
        {"nls-breather",
         "# Desk-scale breather benchmark: fine cubic Schrodinger solve\n"
         "# against the two-step coarse closure at full coupling.\n"
         "[simulation]\n"
         "experiment = breather\n"
         "n = 1024\n"
         "coarse_n = 128\n"
         "dt = 2e-5\n"
         "coarse_dt = 1e-3\n"
         "T = 1\n"
         "cadence = 5000\n"
         "alpha = -1\n"
         "[output]\n"
         "dir = out/nls-breather\n"},
        {"het-dispersion",
         "# Dispersion table for diffusion through 1/(1 + a cos k x):\n"
         "# assembled-cell decay rates against the bound closure response.\n"
         "[family]\n"
         "kind = heterogeneous-diffusion\n"
         "[orders]\n"
         "gamma = 7\n"
         "a = 3\n"
         "[simulation]\n"
         "experiment = dispersion\n"
         "a = 0.5\n"
         "k = 50.26548245743669\n"
         "cell_nodes = 64\n"
         "modes = 1, 2, 3\n"
         "[output]\n"
         "dir = out/het-dispersion\n"},
        {"verify-small",
         "# Exact certificate sweep over small coupled ensembles.\n"
         "[verification]\n"
         "ensembles = 2, 3, 4, 5\n"
         "gammas = 0, 7/10, 1, 1/2\n"
         "thetas = 0, 3/10, -1/2\n"
         "degree = 4\n"
         "trials = 3\n"
         "commute_max = 12\n"
         "dichotomy_ensembles = 4, 5, 6, 7, 8\n"
         "cell_nodes = 64\n"
         "[output]\n"
         "dir = out/verify-small\n"}};
    return table;
}

std::string StencilDocument::to_json() const {
    njson j;
    j["schema"] = "holo-stencil/1";
    j["tool"] = njson{{"version", kToolVersion}, {"seed", seed}};
    njson fam;
    fam["kind"] = family.name();
    fam["theta"] = family.theta.str();
    fam["perturbed"] = family.perturbed;
    fam["advection_order"] = family.c_order;
    fam["lattice"] = family.lattice;
    j["family"] = fam;
    j["orders"] = njson{{"gamma", orders.g}, {"alpha", orders.al}, {"a", orders.a}};
    j["iterations"] = iterations;
    j["certificate"] = njson{{"interior", certificate.pde_zero},
                             {"value_edge", certificate.value_edge_zero},
                             {"deriv_edge", certificate.deriv_edge_zero},
                             {"amplitude", certificate.amplitude_zero}};
    njson cl = njson::array();
    for (const auto& [key, st] : closure.terms()) {
        njson term;
        term["gamma"] = key.g;
        term["alpha"] = key.al;
        term["a"] = key.a;
        njson taps = njson::array();
        for (const auto& [hs, coef] : st.taps())
            taps.push_back(njson{{"halfshift", hs}, {"coeff", coef.str()}});
        term["taps"] = taps;
        cl.push_back(term);
    }
    j["closure"] = cl;
    if (equiv) {
        njson e;
        e["depth"] = equiv->taylor_depth;
        njson rows = njson::object();
        for (const auto& [m, p] : equiv->rows) rows[std::to_string(m)] = p.str();
        e["rows"] = rows;
        j["equivalent_pde"] = e;
    }
    if (consistency) {
        njson c;
        c["verdict"] = consistency->defect_order < 0 ? "consistent" : "defective";
        c["defect_order"] = consistency->defect_order;
        c["checked_through"] = consistency->checked_through;
        njson rows = njson::object();
        for (const auto& [m, p] : consistency->defects)
            rows[std::to_string(m)] = p.str();
        c["defects"] = rows;
        j["consistency"] = c;
    }
    return j.dump(2) + "\n";
}

StencilDocument StencilDocument::from_json(const std::string& text) {
    try {
        const njson j = njson::parse(text);
        if (j.at("schema").get<std::string>() != "holo-stencil/1")
            throw ParseError("unsupported document schema");
        StencilDocument doc;
        doc.seed = j.at("tool").at("seed").get<unsigned>();
        const njson& fam = j.at("family");
        doc.family = family_from_parts(fam.at("kind").get<std::string>(),
                                       fam.at("perturbed").get<bool>(),
                                       fam.at("advection_order").get<int>(),
                                       fam.at("lattice").get<bool>());
        doc.family = doc.family.with_theta(
            ParamPoly::parse(fam.at("theta").get<std::string>()));
        const njson& ord = j.at("orders");
        doc.orders = Orders{ord.at("gamma").get<int>(), ord.at("alpha").get<int>(),
                            ord.at("a").get<int>()};
        doc.iterations = j.at("iterations").get<int>();
        const njson& cert = j.at("certificate");
        doc.certificate.pde_zero = cert.at("interior").get<bool>();
        doc.certificate.value_edge_zero = cert.at("value_edge").get<bool>();
        doc.certificate.deriv_edge_zero = cert.at("deriv_edge").get<bool>();
        doc.certificate.amplitude_zero = cert.at("amplitude").get<bool>();
        doc.closure = StencilSeries(doc.orders);
        for (const njson& term : j.at("closure")) {
            const SeriesKey key{term.at("gamma").get<int>(),
                               term.at("alpha").get<int>(), term.at("a").get<int>()};
            Stencil st;
            for (const njson& tap : term.at("taps"))
                st.add_tap(tap.at("halfshift").get<int>(),
                           ParamPoly::parse(tap.at("coeff").get<std::string>()));
            doc.closure.add(key, st);
        }
        if (j.contains("equivalent_pde")) {
            const njson& e = j.at("equivalent_pde");
            EquivalentPde pde;
            pde.taylor_depth = e.at("depth").get<int>();
            for (const auto& [k, v] : e.at("rows").items())
                pde.rows[to_int("row", k)] = ParamPoly::parse(v.get<std::string>());
            doc.equiv = std::move(pde);
        }
        if (j.contains("consistency")) {
            const njson& c = j.at("consistency");
            ConsistencyReport rep;
            rep.defect_order = c.at("defect_order").get<int>();
            rep.checked_through = c.at("checked_through").get<int>();
            for (const auto& [k, v] : c.at("defects").items())
                rep.defects[to_int("row", k)] = ParamPoly::parse(v.get<std::string>());
            doc.consistency = std::move(rep);
        }
        return doc;
    } catch (const njson::exception& e) {
        throw ParseError(std::string("stencil document: ") + e.what());
    } catch (const ConfigError& e) {
        throw ParseError(std::string("stencil document: ") + e.what());
    }
}

StencilDocument build_document(const ToolConfig& cfg, unsigned seed) {
    if (!cfg.family || !cfg.orders)
        throw ConfigError("construction needs [family] and [orders] sections");
    StencilDocument doc;
    doc.seed = seed;
    doc.family = family_from(*cfg.family);
    doc.orders = *cfg.orders;
    const ConstructionResult res = construct(doc.family, doc.orders);
    doc.iterations = res.iterations;
    doc.certificate = res.residuals;
    doc.closure = res.evolution.g;
    return doc;
}

void write_file_atomic(const std::string& path, const std::string& text) {
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw Error("cannot open '" + tmp.string() + "'");
        f << text;
        f.flush();
        if (!f) throw Error("short write to '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

namespace {

void write_json_file(const std::string& path, const njson& j) {
    write_file_atomic(path, j.dump(2) + "\n");
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot read '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

// ---- exact matrix helpers for the verify command ----

RatMatrix transpose(const RatMatrix& m) {
    const std::size_t n = m.size();
    RatMatrix out(n, std::vector<Rat>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) out[j][i] = m[i][j];
    return out;
}

RatMatrix matmul(const RatMatrix& x, const RatMatrix& y) {
    const std::size_t n = x.size();
    RatMatrix out(n, std::vector<Rat>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t l = 0; l < n; ++l) {
            if (x[i][l].is_zero()) continue;
            for (std::size_t j = 0; j < n; ++j) out[i][j] += x[i][l] * y[l][j];
        }
    return out;
}

Rat gauss_det(RatMatrix m) {
    const int n = static_cast<int>(m.size());
    Rat det(1);
    for (int c = 0; c < n; ++c) {
        int pivot = -1;
        for (int r = c; r < n; ++r)
            if (!m[r][c].is_zero()) {
                pivot = r;
                break;
            }
        if (pivot < 0) return Rat(0);
        if (pivot != c) {
            std::swap(m[pivot], m[c]);
            det = -det;
        }
        det *= m[c][c];
        for (int r = c + 1; r < n; ++r) {
            if (m[r][c].is_zero()) continue;
            const Rat f = m[r][c] / m[c][c];
            for (int cc = c; cc < n; ++cc) m[r][cc] -= f * m[c][cc];
        }
    }
    return det;
}

struct CheckOutcome {
    std::string name;
    bool pass = true;
    int cases = 0;
    int exceptions = 0;
    std::string detail;
};

njson outcome_json(const CheckOutcome& c) {
    njson j;
    j["name"] = c.name;
    j["pass"] = c.pass;
    j["cases"] = c.cases;
    j["exceptions"] = c.exceptions;
    if (!c.detail.empty()) j["detail"] = c.detail;
    return j;
}

} // namespace

int cmd_construct(const ToolConfig& cfg, const std::string& out_dir,
                  unsigned seed, std::ostream& log) {
    StencilDocument doc;
    try {
        doc = build_document(cfg, seed);
    } catch (const NonConvergence& e) {
        log << "construction failed: " << e.what() << "\n";
        return 1;
    }
    const std::string path = (fs::path(out_dir) / "stencil.json").string();
    write_file_atomic(path, doc.to_json());
    log << "wrote " << path << " (" << doc.family.name() << ", "
        << doc.iterations << " refinements, "
        << (doc.certified() ? "certified" : "UNCERTIFIED") << ")\n";
    return doc.certified() ? 0 : 1;
}

int cmd_equiv(const std::string& doc_path, int depth, const std::string& out_dir,
              std::ostream& log) {
    if (depth < 1 || depth > 16) throw ConfigError("depth outside 1..16");
    StencilDocument doc = StencilDocument::from_json(read_file(doc_path));
    const MacroEvolution ev{doc.closure};
    doc.equiv = to_equivalent_pde(ev, depth);
    doc.consistency = consistency_report(*doc.equiv, doc.family);
    const std::string path = (fs::path(out_dir) / "equiv.json").string();
    write_file_atomic(path, doc.to_json());
    log << "wrote " << path << " (" << doc.equiv->rows.size() << " rows, ";
    if (doc.consistency->defect_order < 0)
        log << "consistent through depth " << doc.consistency->checked_through;
    else
        log << "first defect at derivative order " << doc.consistency->defect_order;
    log << ")\n";
    return 0;
}

int cmd_verify(const ToolConfig& cfg, const std::string& out_dir, unsigned seed,
               std::ostream& log) {
    if (!cfg.verify)
        throw ConfigError("verification needs a [verification] section");
    const auto& v = *cfg.verify;
    const unsigned eff_seed = v.seed.value_or(seed);
    std::vector<CheckOutcome> checks;

    {
        CheckOutcome c{"commutativity", true, 0, 0, ""};
        for (int N = 2; N <= v.commute_max; ++N)
            for (const Rat& g : v.gammas)
                for (const Rat& t : v.thetas) {
                    const auto cm = build_coupling(N, g, t);
                    const RatMatrix pt = transpose(cm.C_plus);
                    if (!(matmul(pt, cm.C_minus) == matmul(cm.C_minus, pt))) {
                        c.pass = false;
                        c.detail = "N=" + std::to_string(N);
                    }
                    ++c.cases;
                }
        checks.push_back(std::move(c));
    }

    {
        // det C+- = a^N - (-1)^N b^N vanishes only for even N at full
        // antisymmetric coupling gamma (1 +- theta) = 1.
        CheckOutcome c{"determinant", true, 0, 0, ""};
        for (int N : v.ensembles)
            for (const Rat& g : v.gammas)
                for (const Rat& t : v.thetas) {
                    const auto cm = build_coupling(N, g, t);
                    bool ok = cm.det_plus == gauss_det(cm.C_plus) &&
                              cm.det_minus == gauss_det(cm.C_minus);
                    const bool even = N % 2 == 0;
                    const bool sp = even && g * (Rat(1) + t) == Rat(1);
                    const bool sm = even && g * (Rat(1) - t) == Rat(1);
                    ok = ok && cm.det_plus.is_zero() == sp &&
                         cm.det_minus.is_zero() == sm;
                    if (sp) ++c.exceptions;
                    if (sm) ++c.exceptions;
                    if (!ok) {
                        c.pass = false;
                        c.detail = "N=" + std::to_string(N) + " gamma=" + g.str() +
                                   " theta=" + t.str();
                    }
                    ++c.cases;
                }
        checks.push_back(std::move(c));
    }

    {
        CheckOutcome c{"self_adjointness", true, 0, 0, ""};
        for (int N : v.ensembles) {
            const auto ens =
                make_ensemble(N, v.degree, Rat(1), eff_seed + 17 * unsigned(N));
            unsigned mix = 0;
            for (const Rat& g : v.gammas)
                for (const Rat& t : v.thetas) {
                    ++mix;
                    const auto rep = self_adjointness_defect(
                        ens, g, t, v.trials, eff_seed + 1000 * unsigned(N) + mix);
                    const bool zig =
                        N % 2 == 0 && g == Rat(1) && t.is_zero();
                    bool ok = rep.exceptional == zig;
                    if (rep.exceptional)
                        ++c.exceptions;
                    else
                        ok = ok && rep.max_defect.is_zero();
                    if (!ok) {
                        c.pass = false;
                        c.detail = "N=" + std::to_string(N) + " gamma=" + g.str() +
                                   " theta=" + t.str();
                    }
                    ++c.cases;
                }
        }
        checks.push_back(std::move(c));
    }

    {
        CheckOutcome c{"circulant_modes", true, 0, 0, ""};
        for (int N : v.ensembles)
            for (const Rat& t : v.thetas) {
                const auto eg = circulant_eigs_V(N, t);
                const bool zig = N % 2 == 0 && t.is_zero();
                bool ok = (eg.zero_index >= 0) == zig;
                for (int idx = 0; idx < int(eg.values.size()); ++idx)
                    if (idx != eg.zero_index)
                        ok = ok && std::abs(eg.values[idx]) > 1e-12;
                if (zig) ++c.exceptions;
                if (!ok) {
                    c.pass = false;
                    c.detail = "N=" + std::to_string(N) + " theta=" + t.str();
                }
                ++c.cases;
            }
        checks.push_back(std::move(c));
    }

    {
        CheckOutcome c{"dichotomy", true, 0, 0, ""};
        const auto flat = [](double) { return 1.0; };
        for (int N : v.dichotomy_ensembles) {
            const auto rep =
                spectral_dichotomy(N, 1.0, flat, v.cell_nodes, v.near_zero_tol);
            const double target = -4.0 * kPi * kPi;
            const bool ok = rep.dichotomy && rep.zero_count == N &&
                            std::abs(rep.gap - target) <= 0.01 * std::abs(target);
            if (!ok) {
                c.pass = false;
                c.detail = "N=" + std::to_string(N) + " gap=" + fmt(rep.gap);
            }
            ++c.cases;
        }
        if (v.dichotomy_ensembles.empty()) c.detail = "no ensembles configured";
        checks.push_back(std::move(c));
    }

    bool all_pass = true;
    njson j;
    j["schema"] = "holo-verify/1";
    j["tool"] = njson{{"version", kToolVersion}, {"seed", eff_seed}};
    njson arr = njson::array();
    for (const auto& c : checks) {
        all_pass = all_pass && c.pass;
        arr.push_back(outcome_json(c));
        log << "check " << c.name << ": " << (c.pass ? "pass" : "FAIL") << " ("
            << c.cases << " cases, " << c.exceptions << " exceptional)\n";
    }
    j["checks"] = arr;
    j["all_pass"] = all_pass;
    write_json_file((fs::path(out_dir) / "verify.json").string(), j);
    return all_pass ? 0 : 1;
}

namespace {

SimGrid initial_grid(const ToolConfig::Simulation& s) {
    if (s.n < 1) throw ConfigError("simulation needs n >= 1");
    if (s.initial == "breather") return breather_state(s.n);
    if (!(s.x_hi > s.x_lo)) throw ConfigError("domain needs x_hi > x_lo");
    if (s.initial == "zero")
        return sample_grid(s.x_lo, s.x_hi, s.n, [](double) { return Cx(0, 0); });
    if (s.initial.rfind("mode:", 0) == 0) {
        const double q = to_dbl("initial", s.initial.substr(5));
        return sample_grid(s.x_lo, s.x_hi, s.n,
                           [q](double x) { return std::polar(1.0, q * x); });
    }
    throw ConfigError("unknown initial state '" + s.initial + "'");
}

RhsFn make_rhs(const ToolConfig& cfg, const ToolConfig::Simulation& s,
               const SimGrid& grid) {
    if (s.solver == "nls_fine") {
        const double al = s.alpha;
        return [al](const SimGrid& g) { return nls_fine_rhs(g, al); };
    }
    if (s.solver == "nls_holistic") {
        const double al = s.alpha;
        return [al](const SimGrid& g) { return nls_holistic_rhs(g, al); };
    }
    if (s.solver == "het_fine") {
        const double a = s.a, k = s.k, phi = s.phi;
        return [a, k, phi](const SimGrid& g) { return het_fine_rhs(g, a, k, phi); };
    }
    if (s.solver == "het_holistic") {
        if (!cfg.family || !cfg.orders)
            throw ConfigError(
                "het_holistic needs [family] and [orders] sections");
        const ConstructionResult res =
            construct(family_from(*cfg.family), *cfg.orders);
        const double th =
            cfg.family->theta ? rat_dbl(*cfg.family->theta) : 0.0;
        const NumericStencil st =
            bind_stencil(res.evolution, th, s.a, s.k, grid.h());
        return [st](const SimGrid& g) { return het_holistic_rhs(g, st); };
    }
    throw ConfigError("unknown solver '" + s.solver + "'");
}

double field_mass(const std::string& solver, const SimGrid& grid,
                  const CxField& f) {
    double m = 0;
    for (const Cx& v : f)
        m += solver.rfind("nls", 0) == 0 ? std::norm(v) : v.real();
    return m * grid.h();
}

int run_single(const ToolConfig& cfg, const ToolConfig::Simulation& s,
               const std::string& out_dir, std::ostream& log) {
    if (!(s.dt > 0) || !(s.T >= 0)) throw ConfigError("needs dt > 0 and T >= 0");
    const SimGrid grid = initial_grid(s);
    const RunConfig rc{s.solver, s.dt, s.T, s.cadence, s.alpha, s.a, s.k, s.phi};
    check_stability(rc, grid);
    const RhsFn rhs = make_rhs(cfg, s, grid);

    Trajectory traj;
    std::optional<double> failed_at;
    try {
        traj = rk4_integrate(grid, rhs, s.dt, s.T, s.cadence);
    } catch (const NonFinite& e) {
        // Rerun with a margin before the recorded failure: two steps for
        // sudden blowups, one percent of the elapsed time so exponential
        // growth lands well below overflow inside the tap sums.
        failed_at = e.time;
        const double safe =
            std::max(0.0, std::min(e.time - 2 * s.dt, 0.99 * e.time));
        try {
            if (safe > 0) traj = rk4_integrate(grid, rhs, s.dt, safe, s.cadence);
        } catch (const NonFinite&) {
            traj = Trajectory{};
        }
        if (traj.times.empty()) {
            traj.times = {0.0};
            traj.snapshots = {grid.values};
        }
    }

    {
        std::ostringstream csv;
        write_trajectory_csv(csv, grid, traj);
        write_file_atomic((fs::path(out_dir) / "trajectory.csv").string(),
                          csv.str());
    }
    njson j;
    j["schema"] = "holo-metrics/1";
    j["experiment"] = "single";
    j["solver"] = s.solver;
    j["n"] = grid.n();
    j["dt"] = s.dt;
    j["T_requested"] = s.T;
    j["T_completed"] = traj.times.back();
    j["snapshots"] = traj.times.size();
    j["finite"] = !failed_at.has_value();
    if (failed_at) j["failed_at"] = *failed_at;
    j["mass_initial"] = field_mass(s.solver, grid, traj.snapshots.front());
    j["mass_final"] = field_mass(s.solver, grid, traj.snapshots.back());
    write_json_file((fs::path(out_dir) / "metrics.json").string(), j);
    if (failed_at)
        log << "solver left finite range at t=" << fmt(*failed_at)
            << ", saved trajectory through t=" << fmt(traj.times.back()) << "\n";
    else
        log << "completed t=" << fmt(traj.times.back()) << " with "
            << traj.times.size() << " snapshots\n";
    return failed_at ? 1 : 0;
}

int run_breather(const ToolConfig::Simulation& in, const std::string& out_dir,
                 bool paper_scale, std::ostream& log) {
    ToolConfig::Simulation s = in;
    if (paper_scale) {
        // Full-size run: 3300 fine nodes against 151 elements.  The
        // element count does not divide the fine grid, so the fields are
        // reported without a pointwise comparison.
        s.n = 3300;
        s.coarse_n = 151;
        s.dt = 4e-6;
        s.coarse_dt = 1e-3;
        s.cadence = 25000;
    }
    if (s.n < 8 || s.coarse_n < 8)
        throw ConfigError("breather needs n and coarse_n of at least 8");
    if (!(s.dt > 0) || !(s.coarse_dt > 0) || !(s.T > 0))
        throw ConfigError("breather needs positive dt, coarse_dt and T");
    const SimGrid fine = breather_state(s.n);
    const SimGrid coarse = breather_state(s.coarse_n);
    check_stability({"nls_fine", s.dt, s.T, s.cadence, s.alpha, 0, 0, 0}, fine);
    check_stability({"nls_holistic", s.coarse_dt, s.T, 1, s.alpha, 0, 0, 0},
                    coarse);
    const double interval = s.dt * s.cadence;
    const long ccad = std::lround(interval / s.coarse_dt);
    if (ccad < 1 || std::abs(double(ccad) * s.coarse_dt - interval) > 1e-9)
        throw ConfigError("snapshot interval dt * cadence must be a multiple "
                          "of coarse_dt");

    const double al = s.alpha;
    const Trajectory ft = rk4_integrate(
        fine, [al](const SimGrid& g) { return nls_fine_rhs(g, al); }, s.dt, s.T,
        s.cadence);
    const Trajectory ct = rk4_integrate(
        coarse, [al](const SimGrid& g) { return nls_holistic_rhs(g, al); },
        s.coarse_dt, s.T, int(ccad));

    {
        std::ostringstream csv;
        write_trajectory_csv(csv, fine, ft);
        write_file_atomic((fs::path(out_dir) / "fine.csv").string(), csv.str());
    }
    {
        std::ostringstream csv;
        write_trajectory_csv(csv, coarse, ct);
        write_file_atomic((fs::path(out_dir) / "coarse.csv").string(), csv.str());
    }

    njson j;
    j["schema"] = "holo-metrics/1";
    j["experiment"] = "breather";
    j["fine"] = njson{{"n", s.n}, {"dt", s.dt}};
    j["coarse"] = njson{{"n", s.coarse_n}, {"dt", s.coarse_dt}};
    j["T"] = s.T;
    j["snapshots"] = ft.times.size();
    if (s.n % s.coarse_n == 0) {
        const RunComparison cmp = compare_runs(fine, ft, coarse, ct);
        njson rows = njson::array();
        for (std::size_t i = 0; i < cmp.times.size(); ++i)
            rows.push_back(njson{{"t", cmp.times[i]},
                                 {"rel_l2", cmp.rel_l2[i]},
                                 {"max_abs", cmp.max_abs[i]}});
        j["comparison"] = njson{{"rows", rows},
                                {"worst_rel_l2", cmp.worst_rel_l2},
                                {"worst_max_abs", cmp.worst_max_abs}};
        log << "worst relative L2 error of |u| over " << cmp.times.size()
            << " snapshots: " << fmt(cmp.worst_rel_l2) << "\n";
    } else {
        j["comparison"] = "skipped: element count does not divide the fine grid";
        log << "comparison skipped: " << s.coarse_n
            << " elements do not divide " << s.n << " fine nodes\n";
    }
    write_json_file((fs::path(out_dir) / "metrics.json").string(), j);
    return 0;
}

int run_dispersion(const ToolConfig& cfg, const ToolConfig::Simulation& s,
                   const std::string& out_dir, std::ostream& log) {
    if (!cfg.family || !cfg.orders)
        throw ConfigError("dispersion needs [family] and [orders] sections");
    if (!(s.k > 0)) throw ConfigError("dispersion needs k > 0");
    if (s.modes.empty()) throw ConfigError("dispersion needs a modes list");
    for (double K : s.modes)
        if (!(K > 0)) throw ConfigError("modes must be positive");
    const double d = 2 * kPi / s.k;
    const double H = s.element_width > 0 ? s.element_width : d;

    const ConstructionResult res = construct(family_from(*cfg.family), *cfg.orders);
    const double th = cfg.family->theta ? rat_dbl(*cfg.family->theta) : 0.0;
    const NumericStencil st = bind_stencil(res.evolution, th, s.a, s.k, H);

    const EquivalentPde pde = to_equivalent_pde(res.evolution, 8);
    std::array<double, 12> at{};
    at[0] = 1.0;  // gamma
    at[1] = th;   // theta
    at[2] = 1.0;  // c
    at[4] = s.a;
    at[5] = H;
    at[6] = s.k;
    at[7] = d;
    const auto pde_rate = [&](double K) {
        double r = 0;
        for (const auto& [m, p] : pde.rows) {
            if (m % 2 != 0) continue;
            r += ((m / 2) % 2 == 0 ? 1.0 : -1.0) * std::pow(K, m) * p.eval(at);
        }
        return r;
    };

    njson rows = njson::array();
    std::ostringstream csv;
    csv.precision(17);
    csv << "K,cell_rate,stencil_rate,equivalent_rate\n";
    double worst = 0;
    for (double K : s.modes) {
        const double cell = bloch_rate(s.a, s.k, s.phi, K, s.cell_nodes);
        const double sym = stencil_symbol(st, H, K);
        const double prd = pde_rate(K);
        const double gap = std::abs(sym - cell) / std::abs(cell);
        worst = std::max(worst, gap);
        rows.push_back(njson{{"K", K},
                             {"cell_rate", cell},
                             {"stencil_rate", sym},
                             {"equivalent_rate", prd},
                             {"rel_gap", gap}});
        csv << K << "," << cell << "," << sym << "," << prd << "\n";
    }
    write_file_atomic((fs::path(out_dir) / "dispersion.csv").string(), csv.str());
    njson j;
    j["schema"] = "holo-metrics/1";
    j["experiment"] = "dispersion";
    j["a"] = s.a;
    j["k"] = s.k;
    j["element_width"] = H;
    j["cell_nodes"] = s.cell_nodes;
    j["rows"] = rows;
    j["worst_rel_gap"] = worst;
    write_json_file((fs::path(out_dir) / "metrics.json").string(), j);
    log << "dispersion table over " << s.modes.size()
        << " modes, worst cell/stencil gap " << fmt(worst) << "\n";
    return 0;
}

} // namespace

int cmd_simulate(const ToolConfig& cfg, const std::string& out_dir,
                 bool paper_scale, std::ostream& log) {
    if (!cfg.sim) throw ConfigError("simulation needs a [simulation] section");
    const auto& s = *cfg.sim;
    fs::create_directories(out_dir);
    if (s.experiment == "single") return run_single(cfg, s, out_dir, log);
    if (s.experiment == "breather")
        return run_breather(s, out_dir, paper_scale, log);
    if (s.experiment == "dispersion")
        return run_dispersion(cfg, s, out_dir, log);
    throw ConfigError("unknown experiment '" + s.experiment + "'");
}

std::pair<SimGrid, Trajectory> read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw ParseError("empty trajectory file");
    const auto head = split(trim(line), ',');
    if (head.size() < 4 || head[0] != "t" || head[1] != "part")
        throw ParseError("trajectory header must start with t,part,x_...");
    const int n = int(head.size()) - 2;
    std::vector<double> xs(n);
    for (int i = 0; i < n; ++i) {
        if (head[i + 2].rfind("x_", 0) != 0)
            throw ParseError("bad coordinate label '" + head[i + 2] + "'");
        xs[i] = to_dbl("x", head[i + 2].substr(2));
    }
    const double h = (xs[n - 1] - xs[0]) / (n - 1);
    if (!(h > 0)) throw ParseError("coordinates must increase");
    for (int i = 0; i < n; ++i)
        if (std::abs(xs[i] - (xs[0] + i * h)) > 1e-9 * (1 + std::abs(xs[i])))
            throw ParseError("coordinates are not uniformly spaced");

    SimGrid grid;
    grid.x_lo = xs[0];
    grid.x_hi = xs[0] + n * h;
    Trajectory traj;
    bool open_imag = false;
    while (std::getline(in, line)) {
        const std::string row = trim(line);
        if (row.empty()) continue;
        const auto cells = split(row, ',');
        if (int(cells.size()) != n + 2)
            throw ParseError("row with " + std::to_string(cells.size()) +
                             " cells, expected " + std::to_string(n + 2));
        const double t = to_dbl("t", cells[0]);
        if (cells[1] == "re") {
            traj.times.push_back(t);
            CxField snap(n);
            for (int i = 0; i < n; ++i)
                snap[i] = Cx(to_dbl("value", cells[i + 2]), 0);
            traj.snapshots.push_back(std::move(snap));
            open_imag = true;
        } else if (cells[1] == "im") {
            if (!open_imag || traj.times.empty() ||
                std::abs(traj.times.back() - t) >
                    1e-9 * std::max(1.0, std::abs(t)))
                throw ParseError("imaginary row without matching real row");
            CxField& snap = traj.snapshots.back();
            for (int i = 0; i < n; ++i)
                snap[i] += Cx(0, to_dbl("value", cells[i + 2]));
            open_imag = false;
        } else {
            throw ParseError("row part must be re or im, got '" + cells[1] + "'");
        }
    }
    if (traj.times.empty()) throw ParseError("trajectory has no snapshots");
    grid.values = traj.snapshots.front();
    return {std::move(grid), std::move(traj)};
}

int cmd_compare(const std::string& csv_a, const std::string& csv_b,
                const std::string& out_dir, std::ostream& log) {
    std::istringstream ia(read_file(csv_a)), ib(read_file(csv_b));
    auto [ga, ta] = read_trajectory_csv(ia);
    auto [gb, tb] = read_trajectory_csv(ib);
    const bool a_fine = ga.n() >= gb.n();
    const SimGrid& fine = a_fine ? ga : gb;
    const SimGrid& coarse = a_fine ? gb : ga;
    RunComparison cmp;
    try {
        cmp = compare_runs(fine, a_fine ? ta : tb, coarse, a_fine ? tb : ta);
    } catch (const GridMismatch& e) {
        log << "incomparable trajectories: " << e.what() << "\n";
        return 1;
    }
    njson rows = njson::array();
    for (std::size_t i = 0; i < cmp.times.size(); ++i)
        rows.push_back(njson{{"t", cmp.times[i]},
                             {"rel_l2", cmp.rel_l2[i]},
                             {"max_abs", cmp.max_abs[i]}});
    njson j;
    j["schema"] = "holo-compare/1";
    j["fine_nodes"] = fine.n();
    j["coarse_nodes"] = coarse.n();
    j["rows"] = rows;
    j["worst_rel_l2"] = cmp.worst_rel_l2;
    j["worst_max_abs"] = cmp.worst_max_abs;
    write_json_file((fs::path(out_dir) / "compare.json").string(), j);
    log << "worst relative L2 error of |u|: " << fmt(cmp.worst_rel_l2) << "\n";
    return 0;
}

namespace {

ToolConfig preset_config(const std::string& name) {
    const auto& table = preset_table();
    const auto it = table.find(name);
    if (it == table.end()) {
        std::string names;
        for (const auto& [key, text] : table) {
            (void)text;
            names += names.empty() ? key : ", " + key;
        }
        throw ConfigError("unknown preset '" + name + "' (available: " + names +
                          ")");
    }
    std::istringstream in(it->second);
    return parse_config(in);
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
    CLI::App app{"exact macroscale closures of lattice dynamics on coupled "
                 "elements"};
    app.name("holo");
    app.require_subcommand(1);

    std::string config_path, preset_name, out_flag, doc_path, csv_a, csv_b;
    unsigned seed = 20260821u;
    int depth = 8;
    bool paper = false;

    CLI::App* c_construct = app.add_subcommand(
        "construct", "Build a closure document with a residual certificate");
    CLI::App* c_equiv = app.add_subcommand(
        "equiv", "Equivalent-PDE table and consistency verdict of a document");
    CLI::App* c_verify = app.add_subcommand(
        "verify", "Exact structural checks of the coupled operator");
    CLI::App* c_sim =
        app.add_subcommand("simulate", "Time-integration experiments");
    CLI::App* c_cmp = app.add_subcommand(
        "compare", "Pointwise comparison of two trajectory files");

    for (CLI::App* c : {c_construct, c_verify, c_sim}) {
        c->add_option("--config", config_path, "Configuration file path");
        c->add_option("--preset", preset_name, "Built-in configuration name");
        c->add_option("--seed", seed, "Seed recorded in outputs");
        c->add_option("--out", out_flag, "Output directory (overrides config)");
    }
    c_sim->add_flag("--paper-scale", paper,
                    "Full-size breather run (3300 nodes, 151 elements)");
    c_equiv->add_option("document", doc_path, "Closure document path")
        ->required();
    c_equiv->add_option("--depth", depth, "Highest derivative row");
    c_equiv->add_option("--out", out_flag, "Output directory");
    c_cmp->add_option("fine", csv_a, "First trajectory file")->required();
    c_cmp->add_option("coarse", csv_b, "Second trajectory file")->required();
    c_cmp->add_option("--out", out_flag, "Output directory");

    std::vector<std::string> rev(args.rbegin(), args.rend());
    try {
        app.parse(rev);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? 0 : 2;
    }

    try {
        ToolConfig cfg;
        if (c_construct->parsed() || c_verify->parsed() || c_sim->parsed()) {
            if (config_path.empty() == preset_name.empty()) {
                err << "exactly one of --config or --preset is required\n";
                return 2;
            }
            cfg = config_path.empty() ? preset_config(preset_name)
                                      : load_config(config_path);
        }
        const std::string out_dir = !out_flag.empty() ? out_flag : cfg.out_dir;
        if (c_construct->parsed()) return cmd_construct(cfg, out_dir, seed, out);
        if (c_verify->parsed()) return cmd_verify(cfg, out_dir, seed, out);
        if (c_sim->parsed()) return cmd_simulate(cfg, out_dir, paper, out);
        if (c_equiv->parsed()) return cmd_equiv(doc_path, depth, out_dir, out);
        return cmd_compare(csv_a, csv_b, out_dir, out);
    } catch (const ConfigError& e) {
        err << "config error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        err << "input error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace holo
