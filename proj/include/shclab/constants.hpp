#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace shclab {

struct ConstantEntry {
    std::string name;
    double value = 0.0;
    double std_error = 0.0;
    std::string provenance;
};

/// Versioned text file of Monte Carlo constants: one "name value stderr provenance" per line.
class ConstantsCache {
  public:
    static constexpr int kVersion = 1;

    static ConstantsCache load(const std::string& path);
    /// Empty cache remembering `path` when the file does not exist.
    static ConstantsCache load_or_empty(const std::string& path);
    void save(const std::string& path) const;
    std::string to_string() const;

    const ConstantEntry* find(const std::string& name) const;
    /// Throws with a hint to regenerate the cache when the entry is missing.
    const ConstantEntry& require(const std::string& name) const;
    void set(ConstantEntry entry);
    const std::vector<ConstantEntry>& entries() const { return entries_; }
    const std::string& source() const { return source_; }

  private:
    std::vector<ConstantEntry> entries_;
    std::string source_;
};

/// "stable_sup_mean:alpha=1.5"
std::string stable_constant_name(double alpha);
/// "fbm_sup_mean:H=0.75"
std::string fbm_constant_name(double hurst);

/// Shipped cache location: $SHCLAB_CONSTANTS, else data/constants.txt in the source tree.
std::string default_constants_path();

struct OracleConfig {
    std::vector<double> alphas = {1.2, 1.5, 1.8, 2.0};
    std::vector<double> hursts = {0.75};
    long n_paths = 400'000;
    int n_steps = 2048;
    std::uint64_t seed = 20'240'601;
    bool serial_reference = false;
};

/// E[sup_{s<=1} Y_s] for the stable process with exponent |xi|^alpha. The grid
/// sup minus Y_1^+ (whose mean is known) is averaged on n and n/2 steps of the
/// same paths and Richardson-extrapolated with rate n^{-1/alpha}.
ConstantEntry stable_sup_mean_oracle(double alpha, long n_paths, int n_steps, std::uint64_t seed,
                                     bool serial_reference = false);
/// E[sup_{s<=1} B^H_s] for standard fBm (E[B_1^2] = 1), same scheme with rate n^{-H}.
ConstantEntry fbm_sup_mean_oracle(double hurst, long n_paths, int n_steps, std::uint64_t seed,
                                  bool serial_reference = false);

ConstantsCache regenerate_constants(const OracleConfig& cfg);

}  // namespace shclab
