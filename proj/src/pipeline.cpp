#include "mibids/pipeline.hpp"

#include <algorithm>
#include <chrono>

#include "mibids/error.hpp"
#include "mibids/features.hpp"

namespace mibids {

namespace {

std::string bool_text(bool b) { return b ? "true" : "false"; }

}  // namespace

TrainResult train_model(const Dataset& full, const TrainOptions& opts, const std::string& data_label) {
    const auto t0 = std::chrono::steady_clock::now();

    Dataset selected = full;
    if (opts.group != "all") {
        GroupCatalog catalog;
        if (opts.groups_file) catalog.load(*opts.groups_file);
        selected = select_group(full, catalog.find(opts.group));
    }
    auto [train, test] = split(selected, opts.split_fraction, opts.seed, opts.stratified);
    if (opts.top_k > 0 && opts.top_k < train.num_features()) {
        const auto keep = top_k(train, opts.top_k);
        train = select_features(train, keep);
        test = select_features(test, keep);
    }

    TrainedModel m;
    m.kind = opts.kind;
    m.schema = train.schema();
    m.classes = train.classes();
    m.dataset_fingerprint = fingerprint(full);
    m.config["data"] = data_label;
    m.config["group"] = opts.group;
    m.config["top_k"] = std::to_string(opts.top_k);
    m.config["split.fraction"] = format_real(opts.split_fraction);
    m.config["split.seed"] = std::to_string(opts.seed);
    m.config["split.stratified"] = bool_text(opts.stratified);

    switch (opts.kind) {
        case ModelKind::Tree: {
            TreeConfig tc = opts.tree;
            tc.seed = opts.seed;
            m.payload = train_tree(train, tc);
            m.config["tree.min_leaf_weight"] = format_real(tc.min_leaf_weight);
            m.config["tree.pruning"] = bool_text(tc.pruning);
            m.config["tree.prune_confidence"] = format_real(tc.prune_confidence);
            m.config["seed"] = std::to_string(tc.seed);
            break;
        }
        case ModelKind::Forest: {
            ForestConfig fc = opts.forest;
            fc.seed = opts.seed;
            if (fc.feature_sample_size == 0) fc.feature_sample_size = default_feature_sample_size(train.num_features());
            m.payload = train_forest(train, fc);
            m.config["forest.n_trees"] = std::to_string(fc.n_trees);
            m.config["forest.feature_sample_size"] = std::to_string(fc.feature_sample_size);
            m.config["forest.bootstrap"] = bool_text(fc.bootstrap);
            m.config["seed"] = std::to_string(fc.seed);
            break;
        }
        case ModelKind::AdaBoost: {
            BoostConfig bc = opts.boost;
            bc.seed = opts.seed;
            m.payload = train_adaboost_m1(train, bc, opts.tree);
            m.config["adaboost.n_rounds"] = std::to_string(bc.n_rounds);
            m.config["tree.min_leaf_weight"] = format_real(opts.tree.min_leaf_weight);
            m.config["tree.pruning"] = bool_text(opts.tree.pruning);
            m.config["tree.prune_confidence"] = format_real(opts.tree.prune_confidence);
            m.config["seed"] = std::to_string(bc.seed);
            break;
        }
        case ModelKind::Mlp: {
            MlpConfig mc = opts.mlp;
            mc.seed = opts.seed;
            if (mc.hidden_units == 0) mc.hidden_units = default_hidden_units(train.num_features(), train.num_classes());
            Dataset input = train;
            if (opts.normalize) {
                m.normalizer = fit_normalizer(train);
                input = apply_normalizer(*m.normalizer, train);
            }
            m.payload = train_mlp(input, mc);
            m.config["mlp.learning_rate"] = format_real(mc.learning_rate);
            m.config["mlp.momentum"] = format_real(mc.momentum);
            m.config["mlp.epochs"] = std::to_string(mc.epochs);
            m.config["mlp.hidden_units"] = std::to_string(mc.hidden_units);
            m.config["mlp.init_range"] = format_real(mc.init_range);
            m.config["mlp.normalize"] = bool_text(opts.normalize);
            m.config["seed"] = std::to_string(mc.seed);
            break;
        }
    }

    TrainResult result;
    result.train_size = train.size();
    result.test_size = test.size();
    result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!test.empty()) result.test_accuracy = evaluate_model(m, test).report.accuracy;
    result.model = std::move(m);
    return result;
}

std::vector<std::size_t> match_schema(const FeatureSchema& schema, const FeatureSchema& available) {
    std::vector<std::size_t> cols;
    std::string missing;
    for (const auto& name : schema.names) {
        if (auto idx = available.index_of(name)) {
            cols.push_back(*idx);
        } else {
            missing += (missing.empty() ? "" : ", ") + name;
        }
    }
    if (!missing.empty()) {
        std::string extra;
        for (const auto& name : available.names) {
            if (!schema.index_of(name)) extra += (extra.empty() ? "" : ", ") + name;
        }
        throw DataError("schema mismatch: missing variables: " + missing +
                        (extra.empty() ? "" : "; extra variables: " + extra));
    }
    return cols;
}

Dataset project_for_model(const TrainedModel& m, const Dataset& d) {
    const auto cols = match_schema(m.schema, d.schema());
    std::vector<std::size_t> class_map(d.num_classes());
    for (std::size_t c = 0; c < d.num_classes(); ++c) {
        auto it = std::lower_bound(m.classes.begin(), m.classes.end(), d.classes()[c]);
        if (it == m.classes.end() || *it != d.classes()[c]) {
            // Only an error if some record actually carries the label.
            class_map[c] = m.classes.size();
        } else {
            class_map[c] = static_cast<std::size_t>(it - m.classes.begin());
        }
    }
    std::vector<MibRecord> records;
    records.reserve(d.size());
    for (const auto& r : d.records()) {
        if (class_map[r.label] == m.classes.size()) {
            throw DataError("class '" + d.label_name(r) + "' is not in the model's class catalog");
        }
        MibRecord p;
        p.label = class_map[r.label];
        for (auto c : cols) p.values.push_back(r.values[c]);
        records.push_back(std::move(p));
    }
    return Dataset(m.schema, m.classes, std::move(records));
}

Dataset heldout_part(const TrainedModel& m, const Dataset& full) {
    if (fingerprint(full) != m.dataset_fingerprint) {
        throw DataError("dataset does not match the one the model was trained on (fingerprint differs)");
    }
    const auto fraction = m.setting("split.fraction");
    const auto seed = m.setting("split.seed");
    const auto stratified = m.setting("split.stratified");
    if (!fraction || !seed || !stratified) throw DataError("model does not record its training split");
    // Column selection does not affect the partition, so split the full table.
    auto parts = split(full, std::stod(*fraction), std::stoull(*seed), *stratified == "true");
    return project_for_model(m, parts.test);
}

std::vector<std::size_t> predict_all(const TrainedModel& m, const Dataset& projected) {
    std::vector<std::size_t> out;
    out.reserve(projected.size());
    for (const auto& r : projected.records()) out.push_back(m.predict(r.values));
    return out;
}

Evaluation evaluate_model(const TrainedModel& m, const Dataset& projected) {
    Evaluation e;
    e.predicted = predict_all(m, projected);
    std::vector<std::size_t> actual;
    actual.reserve(projected.size());
    for (const auto& r : projected.records()) actual.push_back(r.label);
    e.report = make_report(confusion_matrix(actual, e.predicted, m.classes));
    return e;
}

}  // namespace mibids
