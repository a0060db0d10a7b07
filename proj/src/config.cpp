#include "config.hpp"

#include <cmath>
#include <set>

namespace mfg {

namespace {

void ensure_keys(const Json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) throw InvalidArgument(where + " must be a JSON object");
    for (auto it = obj.begin(); it != obj.end(); ++it)
        if (!allowed.count(it.key()))
            throw InvalidArgument("unknown key \"" + it.key() + "\" in " + where);
}

Mat parse_matrix(const Json& j, const std::string& where) {
    if (j.is_number()) return Mat::Constant(1, 1, j.get<double>());
    if (j.is_array() && !j.empty() && j[0].is_array()) {
        const int rows = static_cast<int>(j.size());
        const int cols = static_cast<int>(j[0].size());
        Mat m(rows, cols);
        for (int r = 0; r < rows; ++r) {
            if (static_cast<int>(j[r].size()) != cols)
                throw InvalidArgument(where + ": ragged matrix");
            for (int c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
        }
        return m;
    }
    throw InvalidArgument(where + ": expected number or matrix (array of arrays)");
}

Vec parse_vector(const Json& j, const std::string& where) {
    if (j.is_number()) return Vec::Constant(1, j.get<double>());
    if (j.is_array()) {
        Vec v(j.size());
        for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
        return v;
    }
    throw InvalidArgument(where + ": expected number or array");
}

PiecewiseConstMat parse_piecewise(const Json& j, const std::string& where) {
    if (j.is_object()) {
        ensure_keys(j, {"breakpoints", "values"}, where);
        PiecewiseConstMat p;
        for (const auto& b : j.at("breakpoints")) p.breakpoints.push_back(b.get<double>());
        for (const auto& v : j.at("values")) p.values.push_back(parse_matrix(v, where));
        return p;
    }
    return PiecewiseConstMat(parse_matrix(j, where));
}

Json matrix_to_json(const Mat& m) {
    if (m.rows() == 1 && m.cols() == 1) return m(0, 0);
    Json rows = Json::array();
    for (int r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (int c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(row);
    }
    return rows;
}

Json piecewise_to_json(const PiecewiseConstMat& p) {
    if (p.constant()) return matrix_to_json(p.values.front());
    Json j;
    j["breakpoints"] = p.breakpoints;
    Json values = Json::array();
    for (const Mat& v : p.values) values.push_back(matrix_to_json(v));
    j["values"] = values;
    return j;
}

} // namespace

LqSpec lq_spec_from_json(const Json& j) {
    ensure_keys(j, {"T", "x0", "sigma", "q", "qbar", "m", "mbar", "n", "b0", "b1", "b2"},
                "lq_spec");
    for (const char* key : {"T", "x0", "sigma", "q", "qbar", "m", "mbar", "n", "b0", "b1", "b2"})
        if (!j.contains(key))
            throw InvalidArgument(std::string("lq_spec is missing required key \"") + key + "\"");
    LqSpec spec;
    spec.T = j.at("T").get<double>();
    spec.x0 = parse_vector(j.at("x0"), "lq_spec.x0");
    spec.d = static_cast<int>(spec.x0.size());
    Mat sigma = parse_matrix(j.at("sigma"), "lq_spec.sigma");
    if (sigma.rows() != spec.d && sigma.size() == 1)
        sigma = Mat::Constant(spec.d, 1, sigma(0, 0));
    spec.sigma = sigma;
    spec.m_noise = static_cast<int>(sigma.cols());
    spec.q = parse_matrix(j.at("q"), "lq_spec.q");
    spec.qbar = parse_matrix(j.at("qbar"), "lq_spec.qbar");
    spec.m = parse_piecewise(j.at("m"), "lq_spec.m");
    spec.mbar = parse_piecewise(j.at("mbar"), "lq_spec.mbar");
    spec.n = parse_piecewise(j.at("n"), "lq_spec.n");
    spec.b0 = parse_piecewise(j.at("b0"), "lq_spec.b0");
    spec.b1 = parse_piecewise(j.at("b1"), "lq_spec.b1");
    spec.b2 = parse_piecewise(j.at("b2"), "lq_spec.b2");
    spec.k = static_cast<int>(spec.b2.values.front().cols());
    spec.check_dimensions();
    return spec;
}

Json lq_spec_to_json(const LqSpec& spec) {
    Json j;
    j["T"] = spec.T;
    j["x0"] = (spec.d == 1) ? Json(spec.x0[0]) : Json(std::vector<double>(spec.x0.data(), spec.x0.data() + spec.d));
    j["sigma"] = matrix_to_json(spec.sigma);
    j["q"] = matrix_to_json(spec.q);
    j["qbar"] = matrix_to_json(spec.qbar);
    j["m"] = piecewise_to_json(spec.m);
    j["mbar"] = piecewise_to_json(spec.mbar);
    j["n"] = piecewise_to_json(spec.n);
    j["b0"] = piecewise_to_json(spec.b0);
    j["b1"] = piecewise_to_json(spec.b1);
    j["b2"] = piecewise_to_json(spec.b2);
    return j;
}

RunConfig parse_config(const std::string& text) {
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const std::exception& e) {
        throw InvalidArgument(std::string("config is not valid JSON: ") + e.what());
    }
    ensure_keys(doc, {"seed", "lq_spec", "model", "grid", "fixedpoint", "experiment"}, "config");

    RunConfig config;
    if (doc.contains("seed")) config.seed = doc.at("seed").get<std::uint64_t>();
    if (doc.contains("lq_spec") && doc.contains("model"))
        throw InvalidArgument("config must contain either lq_spec or model, not both");
    if (doc.contains("lq_spec")) config.lq_spec = lq_spec_from_json(doc.at("lq_spec"));
    if (doc.contains("model")) {
        const Json& m = doc.at("model");
        ensure_keys(m, {"name", "T", "x0", "sigma", "q", "m", "b1", "b2", "theta"}, "model");
        if (!m.contains("name")) throw InvalidArgument("model block needs a name");
        config.builtin_model = m;
    }
    if (doc.contains("grid")) {
        ensure_keys(doc.at("grid"), {"n_steps"}, "grid");
        config.n_steps = doc.at("grid").at("n_steps").get<int>();
        if (*config.n_steps < 1) throw InvalidArgument("grid.n_steps must be >= 1");
    }
    if (doc.contains("fixedpoint")) {
        const Json& fp = doc.at("fixedpoint");
        ensure_keys(fp,
                    {"damping", "tolerance", "max_iters", "n_particles", "support_size", "lattice",
                     "check_uniqueness"},
                    "fixedpoint");
        auto& out = config.fixedpoint;
        if (fp.contains("damping")) out.damping = fp.at("damping").get<double>();
        if (fp.contains("tolerance")) out.tolerance = fp.at("tolerance").get<double>();
        if (fp.contains("max_iters")) out.max_iters = fp.at("max_iters").get<int>();
        if (fp.contains("n_particles")) out.n_particles = fp.at("n_particles").get<int>();
        if (fp.contains("support_size")) out.support_size = fp.at("support_size").get<int>();
        if (fp.contains("check_uniqueness"))
            out.check_uniqueness = fp.at("check_uniqueness").get<bool>();
        if (fp.contains("lattice")) {
            const Json& lat = fp.at("lattice");
            ensure_keys(lat,
                        {"spacing", "radius", "quad_order", "inner_tol", "inner_max_iters",
                         "extrapolation_margin"},
                        "fixedpoint.lattice");
            if (lat.contains("spacing")) out.lattice.spacing = lat.at("spacing").get<double>();
            if (lat.contains("radius") && !lat.at("radius").is_null())
                out.lattice.radius = lat.at("radius").get<double>();
            if (lat.contains("quad_order")) out.lattice.quad_order = lat.at("quad_order").get<int>();
            if (lat.contains("inner_tol")) out.lattice.inner_tol = lat.at("inner_tol").get<double>();
            if (lat.contains("inner_max_iters"))
                out.lattice.inner_max_iters = lat.at("inner_max_iters").get<int>();
            if (lat.contains("extrapolation_margin"))
                out.lattice.extrapolation_margin = lat.at("extrapolation_margin").get<double>();
        }
    }
    if (doc.contains("experiment")) config.experiment = doc.at("experiment");
    config.fixedpoint.seed = config.seed;
    config.canonical = doc;
    return config;
}

std::string canonical_config(const RunConfig& config) {
    Json doc = config.canonical;
    doc["seed"] = config.seed;
    return doc.dump(2) + "\n";
}

MfgModel build_quartic_control_model(double q, double m, double b1, double b2, double sigma,
                                     double x0, double T, double theta) {
    if (theta < 0.0) throw InvalidArgument("quartic coefficient must be non-negative");
    MfgModel model;
    model.T = T;
    model.d = model.k = model.m = 1;
    model.x0 = Vec::Constant(1, x0);
    model.sigma = Mat::Constant(1, 1, sigma);
    model.measure_dep = MeasureDependence::none;
    model.b0 = [](double, const DiscreteMeasure&) { return Vec::Zero(1); };
    model.b1 = [b1](double) { return Mat::Constant(1, 1, b1); };
    model.b2 = [b2](double) { return Mat::Constant(1, 1, b2); };
    model.f = [m, theta](double, const Vec& x, const DiscreteMeasure&, const Vec& a) {
        const double a2 = a[0] * a[0];
        return 0.5 * m * m * x[0] * x[0] + 0.5 * a2 + theta * a2 * a2;
    };
    model.df_dx = [m](double, const Vec& x, const DiscreteMeasure&, const Vec&) {
        return Vec::Constant(1, m * m * x[0]);
    };
    model.df_dalpha = [theta](double, const Vec&, const DiscreteMeasure&, const Vec& a) {
        return Vec::Constant(1, a[0] + 4.0 * theta * a[0] * a[0] * a[0]);
    };
    model.g = [q](const Vec& x, const DiscreteMeasure&) { return 0.5 * q * q * x[0] * x[0]; };
    model.dg_dx = [q](const Vec& x, const DiscreteMeasure&) {
        return Vec::Constant(1, q * q * x[0]);
    };
    model.lambda = 0.5; // quartic term only strengthens convexity
    model.c_L = std::max({1.0, std::abs(b1) + std::abs(b2), m * m, q * q});
    return model;
}

MfgModel build_model_from_config(const RunConfig& config) {
    if (config.lq_spec) return build_lq_model(*config.lq_spec);
    if (!config.builtin_model) throw InvalidArgument("config needs lq_spec or model");
    const Json& m = *config.builtin_model;
    const std::string name = m.at("name").get<std::string>();
    if (name == "quartic_control") {
        auto get = [&](const char* key, double fallback) {
            return m.contains(key) ? m.at(key).get<double>() : fallback;
        };
        return build_quartic_control_model(get("q", 1.0), get("m", 1.0), get("b1", 0.0),
                                           get("b2", 1.0), get("sigma", 1.0), get("x0", 1.0),
                                           get("T", 1.0), get("theta", 0.1));
    }
    throw InvalidArgument("unknown builtin model: " + name);
}

} // namespace mfg
