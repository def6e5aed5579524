#include "support.hpp"

#include <sys/wait.h>

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "mibids/rng.hpp"

namespace testsupport {

namespace fs = std::filesystem;

fs::path fixture(const std::string& name) { return fs::path(MIBIDS_FIXTURE_DIR) / name; }

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    if (!f) throw std::runtime_error("cannot read " + p.string());
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

TempDir::TempDir() {
    static std::atomic<int> counter{0};
    path_ = fs::temp_directory_path() /
            ("mibids-test-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    fs::remove_all(path_);
    fs::create_directories(path_);
}

TempDir::~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
}

mibids::FeatureSchema schema_of(std::size_t n) {
    mibids::FeatureSchema s;
    for (std::size_t j = 0; j < n; ++j) s.names.push_back("f" + std::to_string(j));
    return s;
}

mibids::Dataset random_dataset(std::uint64_t seed, std::size_t n, std::size_t features, std::size_t classes) {
    mibids::Rng rng(seed);
    std::vector<std::vector<double>> rows(n, std::vector<double>(features));
    for (auto& r : rows)
        for (auto& v : r) v = rng.uniform(-10.0, 10.0);
    // Label = bucket of a random linear combination; continuous values make every x distinct.
    std::vector<double> w(features);
    for (auto& v : w) v = rng.uniform(-1.0, 1.0);
    std::vector<std::string> labels;
    for (const auto& r : rows) {
        double s = 0.0;
        for (std::size_t j = 0; j < features; ++j) s += w[j] * r[j];
        const double u = 0.5 + 0.5 * std::tanh(s / 5.0);
        auto c = static_cast<std::size_t>(u * static_cast<double>(classes));
        if (c >= classes) c = classes - 1;
        labels.push_back("c" + std::to_string(c));
    }
    return mibids::make_dataset(schema_of(features), std::move(rows), labels);
}

mibids::Dataset noisy_dataset(std::uint64_t seed, std::size_t n, std::size_t features, std::size_t classes) {
    mibids::Rng rng(seed);
    std::vector<std::vector<double>> rows(n, std::vector<double>(features));
    std::vector<std::string> labels;
    for (std::size_t i = 0; i < n; ++i) {
        for (auto& v : rows[i]) v = rng.uniform(0.0, 1.0);
        labels.push_back("c" + std::to_string(i < classes ? i : rng.index(classes)));
    }
    return mibids::make_dataset(schema_of(features), std::move(rows), labels);
}

mibids::Mlp random_mlp(std::uint64_t seed, std::size_t in, std::size_t hidden, std::size_t out, double scale) {
    mibids::Mlp m(in, hidden, out);
    mibids::Rng rng(seed);
    for (auto* v : {&m.hidden.weights, &m.hidden.bias, &m.output.weights, &m.output.bias})
        for (auto& w : *v) w = rng.uniform(-scale, scale);
    return m;
}

namespace {

double half_squared_error(const mibids::Mlp& m, const std::vector<double>& x, const std::vector<double>& t) {
    const auto o = m.forward(x);
    double l = 0.0;
    for (std::size_t k = 0; k < o.size(); ++k) l += 0.5 * (o[k] - t[k]) * (o[k] - t[k]);
    return l;
}

}  // namespace

double gradient_check(const mibids::Mlp& m, const std::vector<double>& x, const std::vector<double>& target,
                      double step, double floor) {
    const auto g = mibids::gradient(m, x, target);
    double worst = 0.0;
    auto probe = [&](std::vector<double> mibids::DenseLayer::*member, bool hidden_layer,
                     const std::vector<double>& analytic) {
        mibids::Mlp p = m;
        auto& values = (hidden_layer ? p.hidden : p.output).*member;
        for (std::size_t k = 0; k < values.size(); ++k) {
            const double orig = values[k];
            values[k] = orig + step;
            const double up = half_squared_error(p, x, target);
            values[k] = orig - step;
            const double down = half_squared_error(p, x, target);
            values[k] = orig;
            const double numeric = (up - down) / (2 * step);
            const double denom = std::max({std::abs(numeric), std::abs(analytic[k]), floor});
            worst = std::max(worst, std::abs(numeric - analytic[k]) / denom);
        }
    };
    probe(&mibids::DenseLayer::weights, true, g.hidden.weights);
    probe(&mibids::DenseLayer::bias, true, g.hidden.bias);
    probe(&mibids::DenseLayer::weights, false, g.output.weights);
    probe(&mibids::DenseLayer::bias, false, g.output.bias);
    return worst;
}

OracleMetrics oracle_metrics(const std::vector<std::size_t>& actual, const std::vector<std::size_t>& predicted,
                             std::size_t cls) {
    double tp = 0, fp = 0, fn = 0;
    for (std::size_t i = 0; i < actual.size(); ++i) {
        const bool a = actual[i] == cls, p = predicted[i] == cls;
        if (a && p) tp += 1;
        if (!a && p) fp += 1;
        if (a && !p) fn += 1;
    }
    OracleMetrics r{};
    r.precision = tp + fp > 0 ? tp / (tp + fp) : 0.0;
    r.recall = tp + fn > 0 ? tp / (tp + fn) : 0.0;
    r.f_measure = r.precision + r.recall > 0 ? 2 * r.precision * r.recall / (r.precision + r.recall) : 0.0;
    return r;
}

namespace {
std::string quote(const std::string& s) {
    std::string q = "'";
    for (char c : s) {
        if (c == '\'') q += "'\\''";
        else q += c;
    }
    return q + "'";
}
}  // namespace

ProcessResult run_cli(const std::vector<std::string>& args) {
    TempDir tmp;
    std::string cmd = quote(MIBIDS_CLI_PATH);
    for (const auto& a : args) cmd += " " + quote(a);
    cmd += " >" + quote((tmp / "out").string()) + " 2>" + quote((tmp / "err").string());
    const int status = std::system(cmd.c_str());
    ProcessResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = read_file(tmp / "out");
    r.err = read_file(tmp / "err");
    return r;
}

}  // namespace testsupport
