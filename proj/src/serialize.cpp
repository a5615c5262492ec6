#include "loadcast/serialize.hpp"

#include <cstring>
#include <fstream>

namespace loadcast {

namespace {

class Writer {
public:
    explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
        if (!out_) throw DataError("cannot write '" + path + "'");
    }

    void raw(const void* p, size_t n) { out_.write(static_cast<const char*>(p), n); }
    void u8(uint8_t v) { raw(&v, 1); }
    void u32(uint32_t v) { raw(&v, 4); }
    void i32(int32_t v) { raw(&v, 4); }
    void i64(int64_t v) { raw(&v, 8); }
    void u64(uint64_t v) { raw(&v, 8); }
    void f64(double v) { raw(&v, 8); }
    void str(const std::string& s) {
        u64(s.size());
        raw(s.data(), s.size());
    }
    void vec(const std::vector<double>& v) {
        u64(v.size());
        raw(v.data(), v.size() * sizeof(double));
    }
    void evec(const Eigen::VectorXd& v) {
        u64(static_cast<uint64_t>(v.size()));
        raw(v.data(), static_cast<size_t>(v.size()) * sizeof(double));
    }
    void emat(const Eigen::MatrixXd& m) {
        u64(static_cast<uint64_t>(m.rows()));
        u64(static_cast<uint64_t>(m.cols()));
        raw(m.data(), static_cast<size_t>(m.size()) * sizeof(double));
    }

private:
    std::ofstream out_;
};

class Reader {
public:
    explicit Reader(const std::string& path) : in_(path, std::ios::binary), path_(path) {
        if (!in_) throw DataError("cannot open '" + path + "'");
    }

    void raw(void* p, size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (in_.gcount() != static_cast<std::streamsize>(n))
            throw DataError("'" + path_ + "': truncated container");
    }
    uint8_t u8() {
        uint8_t v;
        raw(&v, 1);
        return v;
    }
    uint32_t u32() {
        uint32_t v;
        raw(&v, 4);
        return v;
    }
    int32_t i32() {
        int32_t v;
        raw(&v, 4);
        return v;
    }
    int64_t i64() {
        int64_t v;
        raw(&v, 8);
        return v;
    }
    uint64_t u64() {
        uint64_t v;
        raw(&v, 8);
        return v;
    }
    double f64() {
        double v;
        raw(&v, 8);
        return v;
    }
    std::string str() {
        auto n = u64();
        std::string s(n, '\0');
        raw(s.data(), n);
        return s;
    }
    std::vector<double> vec() {
        auto n = u64();
        std::vector<double> v(n);
        raw(v.data(), n * sizeof(double));
        return v;
    }
    Eigen::VectorXd evec() {
        auto n = u64();
        Eigen::VectorXd v(static_cast<Eigen::Index>(n));
        raw(v.data(), n * sizeof(double));
        return v;
    }
    Eigen::MatrixXd emat() {
        auto r = u64();
        auto c = u64();
        Eigen::MatrixXd m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c));
        raw(m.data(), r * c * sizeof(double));
        return m;
    }

private:
    std::ifstream in_;
    std::string path_;
};

void write_header(Writer& w, const std::string& tag) {
    w.raw(kContainerMagic, std::strlen(kContainerMagic));
    w.u32(kContainerVersion);
    w.str(tag);
}

std::string read_header(Reader& r, const std::string& path) {
    char magic[6] = {};
    r.raw(magic, std::strlen(kContainerMagic));
    if (std::memcmp(magic, kContainerMagic, std::strlen(kContainerMagic)) != 0)
        throw DataError("'" + path + "' is not a model container");
    uint32_t version = r.u32();
    if (version != kContainerVersion)
        throw DataError("'" + path + "': unsupported container version " +
                        std::to_string(version));
    return r.str();
}

void write_basis(Writer& w, const SplineBasis& b) {
    w.u8(b.kind == SplineBasis::Kind::CyclicCubicBSpline ? 1 : 0);
    w.i32(b.degree);
    w.f64(b.domain_min);
    w.f64(b.domain_max);
    w.vec(b.knots);
}

SplineBasis read_basis(Reader& r) {
    SplineBasis b;
    b.kind = r.u8() ? SplineBasis::Kind::CyclicCubicBSpline : SplineBasis::Kind::CubicBSpline;
    b.degree = r.i32();
    b.domain_min = r.f64();
    b.domain_max = r.f64();
    b.knots = r.vec();
    return b;
}

void write_term(Writer& w, const FittedTerm& t) {
    w.str(term_label(t.spec));
    w.i32(t.col_start);
    w.i32(t.col_count);
    w.u8(t.penalized ? 1 : 0);
    w.f64(t.lambda);
    write_basis(w, t.basis1);
    write_basis(w, t.basis2);
    w.u8(t.linear_marginal1 ? 1 : 0);
    w.f64(t.lin_scale_a);
    w.f64(t.lin_scale_b);
    w.vec(t.centering);
    w.u64(t.cat_levels.size());
    for (auto [a, b] : t.cat_levels) {
        w.i32(a);
        w.i32(b);
    }
    w.u64(t.by_levels.size());
    for (int v : t.by_levels) w.i32(v);
    w.f64(t.effect_mean);
    w.f64(t.effect_sd);
}

FittedTerm read_term(Reader& r) {
    FittedTerm t;
    std::string label = r.str();
    // Terms are stored by their canonical label; re-parse through a stub
    // formula to recover the structured form.
    Formula f = parse_formula("y ~ " + label);
    t.spec = f.terms.at(0);
    t.label = label;
    t.col_start = r.i32();
    t.col_count = r.i32();
    t.penalized = r.u8() != 0;
    t.lambda = r.f64();
    t.basis1 = read_basis(r);
    t.basis2 = read_basis(r);
    t.linear_marginal1 = r.u8() != 0;
    t.lin_scale_a = r.f64();
    t.lin_scale_b = r.f64();
    t.centering = r.vec();
    auto n_cat = r.u64();
    for (uint64_t i = 0; i < n_cat; ++i) {
        int a = r.i32();
        int b = r.i32();
        t.cat_levels.emplace_back(a, b);
    }
    auto n_by = r.u64();
    for (uint64_t i = 0; i < n_by; ++i) t.by_levels.push_back(r.i32());
    t.effect_mean = r.f64();
    t.effect_sd = r.f64();
    return t;
}

}  // namespace

void save_gam_bank(const std::string& path, const GamBank& bank) {
    Writer w(path);
    write_header(w, "gam_bank");
    w.str(print_formula(bank.formula));
    w.i64(bank.train_start);
    w.i64(bank.train_end);
    w.u64(bank.models.size());
    for (const auto& m : bank.models) {
        w.i32(m.half_hour);
        w.evec(m.coef);
        w.f64(m.resid_variance);
        w.f64(m.edf);
        w.i64(m.n_train);
        w.u64(m.terms.size());
        for (const auto& t : m.terms) write_term(w, t);
    }
}

GamBank load_gam_bank(const std::string& path) {
    Reader r(path);
    if (read_header(r, path) != "gam_bank")
        throw DataError("'" + path + "' does not hold a GAM bank");
    GamBank bank;
    bank.formula = parse_formula(r.str());
    bank.train_start = r.i64();
    bank.train_end = r.i64();
    auto n_models = r.u64();
    for (uint64_t i = 0; i < n_models; ++i) {
        GamModel m;
        m.half_hour = r.i32();
        m.coef = r.evec();
        m.resid_variance = r.f64();
        m.edf = r.f64();
        m.n_train = r.i64();
        auto n_terms = r.u64();
        for (uint64_t j = 0; j < n_terms; ++j) m.terms.push_back(read_term(r));
        bank.models.push_back(std::move(m));
    }
    return bank;
}

void save_forest(const std::string& path, const Forest& forest) {
    Writer w(path);
    write_header(w, "forest");
    w.i32(forest.config.n_trees);
    w.i32(forest.config.max_depth);
    w.i32(forest.config.mtry);
    w.i32(forest.config.min_leaf);
    w.u8(forest.config.bootstrap == BootstrapKind::Block ? 1 : 0);
    w.i64(forest.config.block_len);
    w.u64(forest.trees.size());
    for (const auto& tree : forest.trees) {
        w.u64(tree.nodes.size());
        for (const auto& n : tree.nodes) {
            w.i32(n.feature);
            w.f64(n.threshold);
            w.i32(n.left);
            w.i32(n.right);
            w.f64(n.value);
        }
    }
}

Forest load_forest(const std::string& path) {
    Reader r(path);
    if (read_header(r, path) != "forest")
        throw DataError("'" + path + "' does not hold a forest");
    Forest forest;
    forest.config.n_trees = r.i32();
    forest.config.max_depth = r.i32();
    forest.config.mtry = r.i32();
    forest.config.min_leaf = r.i32();
    forest.config.bootstrap = r.u8() ? BootstrapKind::Block : BootstrapKind::Iid;
    forest.config.block_len = r.i64();
    auto n_trees = r.u64();
    for (uint64_t i = 0; i < n_trees; ++i) {
        Tree tree;
        auto n_nodes = r.u64();
        for (uint64_t j = 0; j < n_nodes; ++j) {
            TreeNode n;
            n.feature = r.i32();
            n.threshold = r.f64();
            n.left = r.i32();
            n.right = r.i32();
            n.value = r.f64();
            tree.nodes.push_back(n);
        }
        forest.trees.push_back(std::move(tree));
    }
    return forest;
}

void save_gam_boost(const std::string& path, const GamBoostModel& model) {
    Writer w(path);
    write_header(w, "gam_boost");
    w.f64(model.intercept);
    w.f64(model.shrinkage);
    w.u64(model.terms.size());
    for (size_t i = 0; i < model.terms.size(); ++i) {
        write_term(w, model.terms[i]);
        w.evec(model.coefs[i]);
    }
}

GamBoostModel load_gam_boost(const std::string& path) {
    Reader r(path);
    if (read_header(r, path) != "gam_boost")
        throw DataError("'" + path + "' does not hold a boosting model");
    GamBoostModel model;
    model.intercept = r.f64();
    model.shrinkage = r.f64();
    auto n = r.u64();
    for (uint64_t i = 0; i < n; ++i) {
        model.terms.push_back(read_term(r));
        model.coefs.push_back(r.evec());
    }
    return model;
}

void save_kalman_snapshot(const std::string& path, const KalmanSnapshot& snap) {
    Writer w(path);
    write_header(w, "kalman_snapshot");
    w.u64(snap.states.size());
    for (size_t i = 0; i < snap.states.size(); ++i) {
        w.evec(snap.states[i].theta);
        w.emat(snap.states[i].P);
        w.i64(snap.states[i].step);
        w.evec(snap.noises[i].q_diag);
        w.f64(snap.noises[i].sigma2);
    }
}

KalmanSnapshot load_kalman_snapshot(const std::string& path) {
    Reader r(path);
    if (read_header(r, path) != "kalman_snapshot")
        throw DataError("'" + path + "' does not hold kalman states");
    KalmanSnapshot snap;
    auto n = r.u64();
    for (uint64_t i = 0; i < n; ++i) {
        KalmanState s;
        s.theta = r.evec();
        s.P = r.emat();
        s.step = r.i64();
        NoiseConfig nc;
        nc.q_diag = r.evec();
        nc.sigma2 = r.f64();
        snap.states.push_back(std::move(s));
        snap.noises.push_back(std::move(nc));
    }
    return snap;
}

std::string container_tag(const std::string& path) {
    Reader r(path);
    return read_header(r, path);
}

}  // namespace loadcast
