#pragma once

#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "holo/equivpde.hpp"
#include "holo/simkit.hpp"

namespace holo {

inline constexpr const char* kToolVersion = "1.0.0";

/// Parsed tool configuration: [section] headers over key = value lines,
/// '#' comments.  Unknown sections or keys are rejected.
struct ToolConfig {
    struct Family {
        std::string kind; // matches PdeFamily::name()
        std::optional<Rat> theta; // symbolic when absent
        bool perturbed = false;
        int c_order = 3;
    };
    struct Simulation {
        std::string experiment = "single"; // single | breather | dispersion
        std::string solver;
        std::string initial = "breather"; // breather | zero | mode:<q>
        int n = 0, coarse_n = 0;
        double x_lo = 0, x_hi = 1;
        double dt = 0, coarse_dt = 0, T = 0;
        int cadence = 1;
        double alpha = 0, a = 0, k = 0, phi = 0;
        double element_width = 0; // dispersion; 0 derives one microcell
        int cell_nodes = 64;
        std::vector<double> modes;
    };
    struct Verification {
        std::vector<int> ensembles;
        std::vector<Rat> gammas, thetas;
        int degree = 4;
        int trials = 3;
        int commute_max = 12;
        std::vector<int> dichotomy_ensembles;
        int cell_nodes = 64;
        double near_zero_tol = 1e-8;
        std::optional<unsigned> seed;
    };

    std::optional<Family> family;
    std::optional<Orders> orders;
    std::optional<Simulation> sim;
    std::optional<Verification> verify;
    std::string out_dir = "out";
};

ToolConfig parse_config(std::istream& in);
ToolConfig load_config(const std::string& path);

/// Built-in configurations, also shipped as files under presets/.
const std::map<std::string, std::string>& preset_table();

/// Serialised closure construction: exact coefficients as text, enough
/// to rebuild the evolution operator without rerunning the refinement.
struct StencilDocument {
    unsigned seed = 0;
    PdeFamily family;
    Orders orders;
    int iterations = 0;
    ResidualReport certificate;
    StencilSeries closure;
    std::optional<EquivalentPde> equiv;
    std::optional<ConsistencyReport> consistency;

    bool certified() const { return certificate.all_zero(); }

    /// Canonical JSON text; rationals and polynomials as exact strings.
    std::string to_json() const;
    static StencilDocument from_json(const std::string& text);
};

StencilDocument build_document(const ToolConfig& cfg, unsigned seed);

/// Writes via a temporary in the same directory plus rename, so readers
/// never observe a half-written file.
void write_file_atomic(const std::string& path, const std::string& text);

// Command entry points.  Exit conventions: 0 success, 1 failed
// computation or check, 2 usage and configuration errors.
int cmd_construct(const ToolConfig& cfg, const std::string& out_dir,
                  unsigned seed, std::ostream& log);
int cmd_equiv(const std::string& doc_path, int depth,
              const std::string& out_dir, std::ostream& log);
int cmd_verify(const ToolConfig& cfg, const std::string& out_dir,
               unsigned seed, std::ostream& log);
int cmd_simulate(const ToolConfig& cfg, const std::string& out_dir,
                 bool paper_scale, std::ostream& log);
int cmd_compare(const std::string& csv_a, const std::string& csv_b,
                const std::string& out_dir, std::ostream& log);

/// Inverse of write_trajectory_csv.
std::pair<SimGrid, Trajectory> read_trajectory_csv(std::istream& in);

/// Full argument-vector front end (excluding argv[0]).
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

} // namespace holo
