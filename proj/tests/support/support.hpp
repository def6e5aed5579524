#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "mibids/dataset.hpp"
#include "mibids/mlp.hpp"

namespace testsupport {

std::filesystem::path fixture(const std::string& name);
std::string read_file(const std::filesystem::path& p);

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
public:
    TempDir();
    ~TempDir();
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
    const std::filesystem::path& path() const { return path_; }
    std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

private:
    std::filesystem::path path_;
};

/// Continuous random features; labels from a random axis-aligned rule so the
/// set is consistent (no duplicate x with different labels).
mibids::Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t features, std::size_t classes);

/// Labeled dataset with labels drawn independently of the features.
mibids::Dataset noisy_dataset(std::uint64_t seed, std::size_t n, std::size_t features, std::size_t classes);

mibids::FeatureSchema schema_of(std::size_t n);

/// Network with weights uniform in [-scale, scale].
mibids::Mlp random_mlp(std::uint64_t seed, std::size_t in, std::size_t hidden, std::size_t out, double scale);

/// Largest per-component relative error between the analytic gradient and
/// central differences of 0.5 * |forward(x) - target|^2. Components where both
/// magnitudes are below `floor` are compared against `floor` instead.
double gradient_check(const mibids::Mlp& m, const std::vector<double>& x, const std::vector<double>& target,
                      double step = 1e-5, double floor = 1e-7);

struct OracleMetrics {
    double precision, recall, f_measure;
};

/// Precision, recall and F-measure for class `cls` recomputed from raw labels.
OracleMetrics oracle_metrics(const std::vector<std::size_t>& actual, const std::vector<std::size_t>& predicted,
                             std::size_t cls);

struct ProcessResult {
    int exit_code = -1;
    std::string out;
    std::string err;
};

/// Runs the built CLI binary with the given arguments.
ProcessResult run_cli(const std::vector<std::string>& args);

}  // namespace testsupport
