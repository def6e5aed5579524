#include "mibids/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "mibids/dataset.hpp"
#include "mibids/error.hpp"
#include "mibids/model.hpp"
#include "mibids/pipeline.hpp"
#include "mibids/snmp/collector.hpp"
#include "mibids/synth.hpp"

namespace mibids::cli {

namespace {

namespace fs = std::filesystem;

struct GlobalOptions {
    std::uint64_t seed = 42;
    bool quiet = false;
    std::string report;
};

struct GenerateOptions {
    bool use_default = false;
    std::string scenario;
    std::string out;
};

struct TrainCliOptions {
    std::string data;
    std::string kind;
    std::string out;
    TrainOptions train;
    std::string groups_file;
    bool no_prune = false;
    bool no_bootstrap = false;
    bool no_normalize = false;
};

struct EvaluateOptions {
    std::string model;
    std::string data;
    bool heldout = false;
};

struct PredictOptions {
    std::string model;
    std::string data;
};

struct CollectOptions {
    std::string agent = "127.0.0.1";
    std::string out;
    snmp::PollConfig poll;
};

/// Writes `text` to a sibling temp file and renames it into place.
void write_atomically(const fs::path& path, const std::string& text) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f) throw DataError("cannot write '" + tmp.string() + "'");
        f << text;
        if (!f) throw DataError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, path);
}

void parse_agent(const std::string& agent, snmp::PollConfig& cfg) {
    std::string host = agent;
    std::string port;
    if (!agent.empty() && agent.front() == '[') {
        const auto close = agent.find(']');
        if (close == std::string::npos) throw UsageError("bad agent address '" + agent + "'");
        host = agent.substr(1, close - 1);
        if (close + 1 < agent.size()) {
            if (agent[close + 1] != ':') throw UsageError("bad agent address '" + agent + "'");
            port = agent.substr(close + 2);
        }
    } else if (const auto colon = agent.rfind(':'); colon != std::string::npos && agent.find(':') == colon) {
        host = agent.substr(0, colon);
        port = agent.substr(colon + 1);
    }
    if (host.empty()) throw UsageError("agent host is empty");
    cfg.host = host;
    if (!port.empty()) {
        try {
            const auto p = std::stoul(port);
            if (p == 0 || p > 65535) throw std::out_of_range("port");
            cfg.port = static_cast<std::uint16_t>(p);
        } catch (const std::exception&) {
            throw UsageError("bad agent port '" + port + "'");
        }
    }
}

int cmd_generate(const GlobalOptions& g, bool seed_given, const GenerateOptions& o, std::ostream& out) {
    if (o.use_default == !o.scenario.empty()) throw UsageError("pass exactly one of --default or --scenario");
    ScenarioSpec spec = o.use_default ? default_scenario() : load_scenario(o.scenario);
    if (seed_given) spec.seed = g.seed;
    const Dataset d = generate(spec);
    write_atomically(o.out, format_csv(d));
    if (!g.quiet) {
        const auto counts = d.class_counts();
        for (std::size_t c = 0; c < d.num_classes(); ++c) out << d.classes()[c] << ": " << counts[c] << '\n';
        out << "total: " << d.size() << " records, " << d.num_features() << " variables -> " << o.out << '\n';
    }
    return kOk;
}

int cmd_train(const GlobalOptions& g, TrainCliOptions o, std::ostream& out) {
    o.train.kind = parse_model_kind(o.kind);
    o.train.seed = g.seed;
    if (!o.groups_file.empty()) o.train.groups_file = o.groups_file;
    if (o.no_prune) o.train.tree.pruning = false;
    if (o.no_bootstrap) o.train.forest.bootstrap = false;
    if (o.no_normalize) o.train.normalize = false;

    const Dataset full = load_csv(o.data);
    const auto result = train_model(full, o.train, o.data);
    save_model(result.model, o.out);

    out << "train=" << result.train_size << " test=" << result.test_size << '\n';
    if (!g.quiet) {
        char buf[256];
        std::snprintf(buf, sizeof buf, "model=%s features=%zu classes=%zu time=%.2fs",
                      std::string(to_string(result.model.kind)).c_str(), result.model.schema.size(),
                      result.model.classes.size(), result.seconds);
        out << buf;
        for (const auto& [k, v] : result.model.config) {
            if (k.find('.') != std::string::npos && !k.starts_with("split.")) out << ' ' << k << '=' << v;
        }
        if (result.test_accuracy) {
            std::snprintf(buf, sizeof buf, " test_accuracy=%.4f", *result.test_accuracy);
            out << buf;
        }
        out << " -> " << o.out << '\n';
    }
    return kOk;
}

int cmd_evaluate(const GlobalOptions& g, const EvaluateOptions& o, std::ostream& out) {
    const TrainedModel m = load_model(o.model);
    std::string data = o.data;
    if (data.empty()) {
        if (!o.heldout) throw UsageError("evaluate needs --data or --heldout");
        data = m.setting("data").value_or("");
        if (data.empty()) throw UsageError("model does not record its training data; pass --data");
    }
    const Dataset full = load_csv(data);
    const Dataset rows = o.heldout ? heldout_part(m, full) : project_for_model(m, full);
    if (rows.empty()) throw DataError("no records to evaluate");
    const auto e = evaluate_model(m, rows);

    if (!g.quiet) out << "model=" << to_string(m.kind) << " records=" << rows.size() << (o.heldout ? " (held out)" : "") << "\n\n";
    out << format_report(e.report);
    if (!g.report.empty()) {
        auto j = report_to_json(e.report);
        j["model"] = std::string(to_string(m.kind));
        j["heldout"] = o.heldout;
        auto& preds = j["predictions"] = nlohmann::json::array();
        for (auto p : e.predicted) preds.push_back(m.classes[p]);
        write_atomically(g.report, j.dump(2) + "\n");
    }
    return kOk;
}

int cmd_predict(const PredictOptions& o, std::ostream& out) {
    const TrainedModel m = load_model(o.model);
    const FeatureTable table = load_unlabeled_csv(o.data);
    const auto cols = match_schema(m.schema, table.schema);
    std::string text;
    for (const auto& n : table.schema.names) text += n + ",";
    text += std::string(kClassColumn) + "\n";
    std::vector<double> x(cols.size());
    for (const auto& row : table.rows) {
        for (std::size_t j = 0; j < cols.size(); ++j) x[j] = row[cols[j]];
        for (double v : row) text += format_real(v) + ",";
        text += m.classes[m.predict(x)] + "\n";
    }
    out << text;
    return kOk;
}

int cmd_collect(const GlobalOptions& g, CollectOptions o, std::ostream& out, std::ostream& err) {
    parse_agent(o.agent, o.poll);
    o.poll.validate();
    auto transport = snmp::make_udp_transport(o.poll.host, o.poll.port);
    std::vector<snmp::CounterSample> samples;
    snmp::PollCallbacks callbacks;
    callbacks.on_sample = [&](const snmp::CounterSample& s) {
        samples.push_back(s);
        if (s.substituted.any() && !g.quiet) {
            err << "sample " << samples.size() << ": agent lacks";
            for (std::size_t v = 0; v < snmp::kInterfaceVars; ++v) {
                if (s.substituted.test(v)) err << ' ' << snmp::interface_columns()[v].name;
            }
            err << "; substituted 0\n";
        }
    };
    callbacks.on_gap = [&](const snmp::PollGap& gap) {
        if (!g.quiet) err << "gap at tick " << gap.tick + 1 << ": " << gap.reason << '\n';
    };
    const auto stats = snmp::poll(o.poll, *transport, callbacks);
    const auto table = snmp::deltas(samples);
    write_atomically(o.out, format_unlabeled_csv(table));
    if (!g.quiet) {
        out << "samples=" << stats.samples << " gaps=" << stats.gaps.size() << " rows=" << table.rows.size()
            << " -> " << o.out << '\n';
    }
    return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Attack classification from SNMP Interface-group counters"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_config("--config", "", "Read options from a TOML/INI file (command-line flags take precedence)");

    GlobalOptions g;
    app.add_option("--seed", g.seed, "Seed for splitting, training and generation")->capture_default_str();
    app.add_flag("--quiet,-q", g.quiet, "Suppress informational output");
    app.add_option("--report", g.report, "Write a JSON evaluation report to this path");

    GenerateOptions gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic labeled dataset");
    generate_cmd->add_flag("--default", gen.use_default, "Use the built-in default scenario");
    generate_cmd->add_option("--scenario", gen.scenario, "Scenario JSON file")->check(CLI::ExistingFile);
    generate_cmd->add_option("-o,--out", gen.out, "Output CSV")->required();

    TrainCliOptions tr;
    auto* train_cmd = app.add_subcommand("train", "Train a classifier and save it");
    train_cmd->add_option("--data", tr.data, "Labeled CSV")->required();
    train_cmd->add_option("--model", tr.kind, "tree | forest | adaboost | mlp")->required();
    train_cmd->add_option("--group", tr.train.group, "Feature group, or 'all'")->capture_default_str();
    train_cmd->add_option("--groups-file", tr.groups_file, "JSON file with extra feature groups");
    train_cmd->add_option("--top-k", tr.train.top_k, "Keep the k best-ranked features (0 = all)");
    train_cmd->add_option("--split", tr.train.split_fraction, "Training fraction")->capture_default_str();
    train_cmd->add_flag("--stratified", tr.train.stratified, "Split per class");
    train_cmd->add_option("--min-leaf", tr.train.tree.min_leaf_weight, "Tree: minimum leaf weight")->capture_default_str();
    train_cmd->add_option("--confidence", tr.train.tree.prune_confidence, "Tree: pruning confidence")->capture_default_str();
    train_cmd->add_flag("--no-prune", tr.no_prune, "Tree/AdaBoost: disable pruning");
    train_cmd->add_option("--trees", tr.train.forest.n_trees, "Forest: number of trees")->capture_default_str();
    train_cmd->add_option("--features", tr.train.forest.feature_sample_size,
                          "Forest: features tried per split (0 = floor(log2 M) + 1)");
    train_cmd->add_flag("--no-bootstrap", tr.no_bootstrap, "Forest: train every tree on the full data");
    train_cmd->add_option("--workers", tr.train.forest.workers, "Forest: training threads (0 = all cores)");
    train_cmd->add_option("--rounds", tr.train.boost.n_rounds, "AdaBoost: boosting rounds")->capture_default_str();
    train_cmd->add_option("--lr", tr.train.mlp.learning_rate, "MLP: learning rate")->capture_default_str();
    train_cmd->add_option("--momentum", tr.train.mlp.momentum, "MLP: momentum")->capture_default_str();
    train_cmd->add_option("--epochs", tr.train.mlp.epochs, "MLP: epochs")->capture_default_str();
    train_cmd->add_option("--hidden", tr.train.mlp.hidden_units, "MLP: hidden units (0 = ceil((M+K)/2))");
    train_cmd->add_flag("--no-normalize", tr.no_normalize, "MLP: feed raw values instead of [-1, 1]");
    train_cmd->add_option("-o,--out", tr.out, "Output model file")->required();

    EvaluateOptions ev;
    auto* evaluate_cmd = app.add_subcommand("evaluate", "Report precision, recall, F-measure and accuracy");
    evaluate_cmd->add_option("--model", ev.model, "Model file")->required();
    evaluate_cmd->add_option("--data", ev.data, "Labeled CSV");
    evaluate_cmd->add_flag("--heldout", ev.heldout, "Evaluate on the test part of the training-time split");

    PredictOptions pr;
    auto* predict_cmd = app.add_subcommand("predict", "Append predicted classes to an unlabeled CSV");
    predict_cmd->add_option("--model", pr.model, "Model file")->required();
    predict_cmd->add_option("--data", pr.data, "Unlabeled CSV")->required();

    CollectOptions co;
    auto* collect_cmd = app.add_subcommand("collect", "Poll an SNMP agent and write counter deltas");
    collect_cmd->add_option("--agent", co.agent, "host[:port]")->capture_default_str();
    collect_cmd->add_option("--community", co.poll.community, "Community string")->capture_default_str();
    collect_cmd->add_option("--if-index", co.poll.if_index, "ifIndex to poll")->capture_default_str();
    collect_cmd->add_option("--interval", co.poll.interval_s, "Seconds between polls")->capture_default_str();
    collect_cmd->add_option("--count", co.poll.count, "Number of polls");
    collect_cmd->add_option("--duration", co.poll.duration_s, "Polling duration in seconds (when --count is unset)");
    collect_cmd->add_option("--timeout", co.poll.timeout_s, "Seconds to wait per request")->capture_default_str();
    collect_cmd->add_option("--retries", co.poll.retries, "Retries per poll")->capture_default_str();
    collect_cmd->add_option("--max-failures", co.poll.max_failures, "Consecutive timeouts before giving up")
        ->capture_default_str();
    collect_cmd->add_option("-o,--out", co.out, "Output CSV")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kUsage;
    }

    const bool seed_given = app.count("--seed") > 0;
    try {
        if (*generate_cmd) return cmd_generate(g, seed_given, gen, out);
        if (*train_cmd) return cmd_train(g, tr, out);
        if (*evaluate_cmd) return cmd_evaluate(g, ev, out);
        if (*predict_cmd) return cmd_predict(pr, out);
        if (*collect_cmd) return cmd_collect(g, co, out, err);
    } catch (const UsageError& e) {
        err << "error: " << e.what() << '\n';
        return kUsage;
    } catch (const TransportError& e) {
        err << "transport error: " << e.what() << '\n';
        return kTransportError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kDataError;
    }
    return kUsage;
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"mibids"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace mibids::cli
