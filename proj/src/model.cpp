#include "mibids/model.hpp"

#include <bit>
#include <algorithm>
#include <fstream>
#include <iterator>

#include "mibids/error.hpp"

namespace mibids {

namespace {

constexpr char kMagic[8] = {'M', 'I', 'B', 'M', 'O', 'D', 'E', 'L'};

class Writer {
public:
    void u8(std::uint8_t v) { out_.push_back(v); }
    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void u64(std::uint64_t v) {
        for (int i = 0; i < 8; ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void size(std::size_t n) {
        if (n > 0xFFFFFFFFu) throw DataError("model component too large to serialize");
        u32(static_cast<std::uint32_t>(n));
    }
    void str(const std::string& s) {
        size(s.size());
        out_.insert(out_.end(), s.begin(), s.end());
    }
    void reals(const std::vector<double>& v) {
        size(v.size());
        for (double x : v) f64(x);
    }
    void strings(const std::vector<std::string>& v) {
        size(v.size());
        for (const auto& s : v) str(s);
    }
    void section(std::string_view tag, const Writer& body) {
        out_.insert(out_.end(), tag.begin(), tag.begin() + 4);
        u64(body.out_.size());
        out_.insert(out_.end(), body.out_.begin(), body.out_.end());
        ++sections_;
    }
    void raw(const char* p, std::size_t n) { out_.insert(out_.end(), p, p + n); }

    std::vector<std::uint8_t>& bytes() { return out_; }
    std::uint32_t sections() const { return sections_; }

private:
    std::vector<std::uint8_t> out_;
    std::uint32_t sections_ = 0;
};

class Reader {
public:
    explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

    bool done() const { return pos_ == in_.size(); }
    std::span<const std::uint8_t> take(std::size_t n) {
        if (n > in_.size() - pos_) throw DataError("model file is truncated");
        auto s = in_.subspan(pos_, n);
        pos_ += n;
        return s;
    }
    std::uint8_t u8() { return take(1)[0]; }
    std::uint32_t u32() {
        auto b = take(4);
        std::uint32_t v = 0;
        for (int i = 3; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
        return v;
    }
    std::uint64_t u64() {
        auto b = take(8);
        std::uint64_t v = 0;
        for (int i = 7; i >= 0; --i) v = (v << 8) | b[static_cast<std::size_t>(i)];
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    std::string str() {
        const auto n = u32();
        auto b = take(n);
        return std::string(b.begin(), b.end());
    }
    std::vector<double> reals() {
        const auto n = u32();
        if (n > (in_.size() - pos_) / 8) throw DataError("model file is truncated");
        std::vector<double> v(n);
        for (auto& x : v) x = f64();
        return v;
    }
    std::vector<std::string> strings() {
        const auto n = u32();
        std::vector<std::string> v;
        for (std::uint32_t i = 0; i < n; ++i) v.push_back(str());
        return v;
    }

private:
    std::span<const std::uint8_t> in_;
    std::size_t pos_ = 0;
};

void write_tree(Writer& w, const DecisionTree& t) {
    w.size(t.num_features());
    w.size(t.num_classes());
    w.size(t.node_count());
    for (const auto& n : t.nodes()) {
        if (n.is_leaf()) {
            w.u8(1);
            for (double p : n.distribution) w.f64(p);
        } else {
            w.u8(0);
            w.u32(n.feature);
            w.f64(n.threshold);
            w.u32(n.left);
            w.u32(n.right);
        }
    }
}

DecisionTree read_tree(Reader& r) {
    const auto nf = r.u32();
    const auto nc = r.u32();
    const auto count = r.u32();
    std::vector<TreeNode> nodes;
    for (std::uint32_t i = 0; i < count; ++i) {
        TreeNode n;
        if (r.u8() == 1) {
            n.distribution.resize(nc);
            for (auto& p : n.distribution) p = r.f64();
        } else {
            n.feature = r.u32();
            n.threshold = r.f64();
            n.left = r.u32();
            n.right = r.u32();
        }
        nodes.push_back(std::move(n));
    }
    return DecisionTree(nf, nc, std::move(nodes));
}

void write_layer(Writer& w, const DenseLayer& l) {
    w.size(l.inputs);
    w.size(l.outputs);
    w.reals(l.weights);
    w.reals(l.bias);
}

DenseLayer read_layer(Reader& r) {
    DenseLayer l;
    l.inputs = r.u32();
    l.outputs = r.u32();
    l.weights = r.reals();
    l.bias = r.reals();
    return l;
}

}  // namespace

std::string_view to_string(ModelKind k) {
    switch (k) {
        case ModelKind::Tree: return "tree";
        case ModelKind::Forest: return "forest";
        case ModelKind::AdaBoost: return "adaboost";
        case ModelKind::Mlp: return "mlp";
    }
    return "unknown";
}

ModelKind parse_model_kind(std::string_view s) {
    if (s == "tree") return ModelKind::Tree;
    if (s == "forest") return ModelKind::Forest;
    if (s == "adaboost") return ModelKind::AdaBoost;
    if (s == "mlp") return ModelKind::Mlp;
    throw UsageError("unknown model kind '" + std::string(s) + "' (expected tree, forest, adaboost or mlp)");
}

std::vector<double> TrainedModel::predict_proba(std::span<const double> x) const {
    if (x.size() != schema.size()) {
        throw DataError("feature vector has " + std::to_string(x.size()) + " values, model expects " +
                        std::to_string(schema.size()));
    }
    std::vector<double> input(x.begin(), x.end());
    if (normalizer) input = normalizer->transform(input);
    return std::visit(
        [&](const auto& m) -> std::vector<double> {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, DecisionTree>) {
                auto p = m.predict_proba(input);
                return {p.begin(), p.end()};
            } else if constexpr (std::is_same_v<T, Mlp>) {
                return m.forward(input);
            } else {
                return m.predict_proba(input);
            }
        },
        payload);
}

std::size_t TrainedModel::predict(std::span<const double> x) const { return argmax(predict_proba(x)); }

std::optional<std::string> TrainedModel::setting(const std::string& key) const {
    auto it = config.find(key);
    if (it == config.end()) return std::nullopt;
    return it->second;
}

std::vector<std::uint8_t> serialize(const TrainedModel& m) {
    Writer meta;
    meta.u8(static_cast<std::uint8_t>(m.kind));
    meta.u64(m.dataset_fingerprint);
    meta.size(m.config.size());
    for (const auto& [k, v] : m.config) {
        meta.str(k);
        meta.str(v);
    }
    Writer schema;
    schema.strings(m.schema.names);
    Writer classes;
    classes.strings(m.classes);

    Writer body;
    const char* tag = nullptr;
    std::visit(
        [&](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DecisionTree>) {
                tag = "TREE";
                write_tree(body, p);
            } else if constexpr (std::is_same_v<T, Forest>) {
                tag = "FRST";
                body.size(p.num_features());
                body.size(p.num_classes());
                body.size(p.trees().size());
                for (const auto& t : p.trees()) write_tree(body, t);
            } else if constexpr (std::is_same_v<T, BoostedEnsemble>) {
                tag = "BOST";
                body.size(p.num_features());
                body.size(p.num_classes());
                body.size(p.stages().size());
                for (const auto& s : p.stages()) {
                    body.f64(s.alpha);
                    write_tree(body, s.tree);
                }
            } else {
                tag = "MLPW";
                write_layer(body, p.hidden);
                write_layer(body, p.output);
            }
        },
        m.payload);

    Writer sections;
    sections.section("META", meta);
    sections.section("SCHM", schema);
    sections.section("CLAS", classes);
    if (m.normalizer) {
        Writer norm;
        norm.reals(m.normalizer->mins());
        norm.reals(m.normalizer->maxs());
        sections.section("NORM", norm);
    }
    sections.section(tag, body);

    Writer out;
    out.raw(kMagic, sizeof kMagic);
    out.u32(TrainedModel::kFormatVersion);
    out.u32(sections.sections());
    auto bytes = std::move(out.bytes());
    bytes.insert(bytes.end(), sections.bytes().begin(), sections.bytes().end());
    return bytes;
}

TrainedModel deserialize(std::span<const std::uint8_t> bytes) {
    Reader r(bytes);
    const auto magic = r.take(sizeof kMagic);
    if (!std::equal(magic.begin(), magic.end(), kMagic)) throw DataError("not a model file (bad magic)");
    const auto version = r.u32();
    if (version != TrainedModel::kFormatVersion) {
        throw DataError("unsupported model format version " + std::to_string(version));
    }
    const auto count = r.u32();

    TrainedModel m;
    bool have_meta = false, have_schema = false, have_classes = false, have_payload = false;
    std::optional<std::pair<std::vector<double>, std::vector<double>>> bounds;
    for (std::uint32_t s = 0; s < count; ++s) {
        const auto tag_bytes = r.take(4);
        const std::string tag(tag_bytes.begin(), tag_bytes.end());
        const auto len = r.u64();
        Reader body(r.take(static_cast<std::size_t>(len)));
        if (tag == "META") {
            const auto kind = body.u8();
            if (kind < 1 || kind > 4) throw DataError("unknown model kind in file");
            m.kind = static_cast<ModelKind>(kind);
            m.dataset_fingerprint = body.u64();
            const auto n = body.u32();
            for (std::uint32_t i = 0; i < n; ++i) {
                auto k = body.str();
                m.config[k] = body.str();
            }
            have_meta = true;
        } else if (tag == "SCHM") {
            m.schema.names = body.strings();
            m.schema.validate();
            have_schema = true;
        } else if (tag == "CLAS") {
            m.classes = body.strings();
            have_classes = true;
        } else if (tag == "NORM") {
            auto lo = body.reals();
            auto hi = body.reals();
            bounds.emplace(std::move(lo), std::move(hi));
        } else if (tag == "TREE") {
            m.payload = read_tree(body);
            have_payload = true;
        } else if (tag == "FRST") {
            const auto nf = body.u32();
            const auto nc = body.u32();
            const auto n = body.u32();
            std::vector<DecisionTree> trees;
            for (std::uint32_t i = 0; i < n; ++i) trees.push_back(read_tree(body));
            m.payload = Forest(nf, nc, std::move(trees));
            have_payload = true;
        } else if (tag == "BOST") {
            const auto nf = body.u32();
            const auto nc = body.u32();
            const auto n = body.u32();
            std::vector<BoostStage> stages;
            for (std::uint32_t i = 0; i < n; ++i) {
                const double alpha = body.f64();
                stages.push_back({read_tree(body), alpha});
            }
            m.payload = BoostedEnsemble(nf, nc, std::move(stages));
            have_payload = true;
        } else if (tag == "MLPW") {
            Mlp net;
            net.hidden = read_layer(body);
            net.output = read_layer(body);
            net.validate();
            m.payload = std::move(net);
            have_payload = true;
        }
        // Unknown sections are skipped.
    }
    if (!r.done()) throw DataError("trailing bytes after the last model section");
    if (!have_meta || !have_schema || !have_classes || !have_payload) {
        throw DataError("model file is missing a required section");
    }
    if (bounds) m.normalizer = Normalizer(m.schema, std::move(bounds->first), std::move(bounds->second));

    const auto payload_kind = std::visit(
        [](const auto& p) {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, DecisionTree>) return ModelKind::Tree;
            if constexpr (std::is_same_v<T, Forest>) return ModelKind::Forest;
            if constexpr (std::is_same_v<T, BoostedEnsemble>) return ModelKind::AdaBoost;
            return ModelKind::Mlp;
        },
        m.payload);
    if (payload_kind != m.kind) throw DataError("model kind does not match its payload");
    return m;
}

void save_model(const TrainedModel& m, const std::filesystem::path& path) {
    const auto bytes = serialize(m);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write model '" + path.string() + "'");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw DataError("write failed for model '" + path.string() + "'");
}

TrainedModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open model '" + path.string() + "'");
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    try {
        return deserialize(bytes);
    } catch (const DataError& e) {
        throw DataError(path.string() + ": " + e.what());
    }
}

}  // namespace mibids
