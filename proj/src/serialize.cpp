#include "seqmed/serialize.hpp"

#include <json.hpp>

#include "seqmed/io.hpp"

namespace seqmed {

namespace {

using Json = nlohmann::ordered_json;

// Top-level fields in write order; a truncated file loses them from the end.
const char* const kSeqMedFields[] = {"version", "type", "kernel", "solver", "C_schedule", "history", "bias", "t"};
const char* const kLapFields[] = {"version", "type",    "kernel",      "solver", "config",
                                  "steps",   "running", "prior_steps", "prior",  "bias", "t"};

Json matrix_json(const Matrix& M) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < M.rows(); ++i) {
        for (Eigen::Index j = 0; j < M.cols(); ++j) data.push_back(M(i, j));
    }
    return Json{{"rows", M.rows()}, {"cols", M.cols()}, {"data", std::move(data)}};
}

Json vector_json(const Vector& v) {
    Json data = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) data.push_back(v(i));
    return data;
}

const Json& field(const Json& j, const char* name, const std::string& where) {
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    const auto it = j.find(name);
    if (it == j.end()) throw SchemaError("missing field '" + std::string(name) + "' in " + where);
    return *it;
}

double number(const Json& j, const char* name, const std::string& where) {
    const Json& v = field(j, name, where);
    if (!v.is_number()) throw SchemaError("field '" + std::string(name) + "' in " + where + " must be a number");
    return v.get<double>();
}

long long integer(const Json& j, const char* name, const std::string& where) {
    const Json& v = field(j, name, where);
    if (!v.is_number_integer()) {
        throw SchemaError("field '" + std::string(name) + "' in " + where + " must be an integer");
    }
    return v.get<long long>();
}

std::string text(const Json& j, const char* name, const std::string& where) {
    const Json& v = field(j, name, where);
    if (!v.is_string()) throw SchemaError("field '" + std::string(name) + "' in " + where + " must be a string");
    return v.get<std::string>();
}

Vector vector_from(const Json& j, const std::string& where) {
    if (!j.is_array()) throw SchemaError(where + " must be an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw SchemaError(where + " must hold numbers");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from(const Json& j, const std::string& where) {
    const long long rows = integer(j, "rows", where);
    const long long cols = integer(j, "cols", where);
    const Vector data = vector_from(field(j, "data", where), where + ".data");
    if (rows < 0 || cols < 0 || data.size() != rows * cols) {
        throw SchemaError(where + ": data length does not match rows x cols");
    }
    Matrix M(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j2 = 0; j2 < cols; ++j2) M(i, j2) = data(i * cols + j2);
    }
    return M;
}

Json kernel_json(const KernelSpec& k) {
    Json j{{"kind", to_string(k.kind)}, {"rbf_width", k.rbf_width}};
    if (k.kind == KernelKind::tfidf_linear) j["idf"] = vector_json(k.idf_weights);
    if (k.kind == KernelKind::precomputed) j["gram"] = matrix_json(*k.precomputed);
    return j;
}

KernelSpec kernel_from(const Json& j) {
    const std::string where = "kernel";
    KernelSpec k;
    try {
        k.kind = kernel_kind_from_string(text(j, "kind", where));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("kernel: ") + e.what());
    }
    k.rbf_width = number(j, "rbf_width", where);
    if (k.kind == KernelKind::tfidf_linear) k.idf_weights = vector_from(field(j, "idf", where), "kernel.idf");
    if (k.kind == KernelKind::precomputed) {
        k.precomputed = std::make_shared<const Matrix>(matrix_from(field(j, "gram", where), "kernel.gram"));
    }
    try {
        k.validate();
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("kernel: ") + e.what());
    }
    return k;
}

Json solver_json(const SolverOptions& o) { return Json{{"tol", o.tol}, {"max_iter", o.max_iter}}; }

SolverOptions solver_from(const Json& j) {
    SolverOptions o;
    o.tol = number(j, "tol", "solver");
    o.max_iter = static_cast<int>(integer(j, "max_iter", "solver"));
    return o;
}

Json approx_json(const ApproxState& s) {
    return Json{{"V", matrix_json(s.V)}, {"s", vector_json(s.s)}, {"d", vector_json(s.d)},
                {"B", s.B},              {"count", s.count}};
}

ApproxState approx_from(const Json& j, const std::string& where) {
    ApproxState s;
    s.V = matrix_from(field(j, "V", where), where + ".V");
    s.s = vector_from(field(j, "s", where), where + ".s");
    s.d = vector_from(field(j, "d", where), where + ".d");
    s.B = number(j, "B", where);
    s.count = static_cast<int>(integer(j, "count", where));
    if (s.s.size() != s.d.size() || (s.count > 0 && s.V.cols() != s.s.size())) {
        throw SchemaError(where + ": inconsistent spectral rank");
    }
    return s;
}

void check_header(const Json& j, const char* expected_type) {
    const long long version = integer(j, "version", "model");
    if (version != kModelFormatVersion) {
        throw SchemaError("unsupported model format version " + std::to_string(version) + " (expected " +
                          std::to_string(kModelFormatVersion) + ")");
    }
    const std::string type = text(j, "type", "model");
    if (type != expected_type) throw SchemaError("model type '" + type + "' where '" + expected_type + "' expected");
}

SeqMedModel seqmed_from(const Json& j) {
    check_header(j, "seqmed");
    KernelSpec kernel = kernel_from(field(j, "kernel", "model"));
    const SolverOptions solver = solver_from(field(j, "solver", "model"));
    const Json& cs = field(j, "C_schedule", "model");
    CSchedule schedule;
    schedule.constant = number(cs, "constant", "C_schedule");
    const Vector per_step = vector_from(field(cs, "per_step", "C_schedule"), "C_schedule.per_step");
    schedule.per_step.assign(per_step.data(), per_step.data() + per_step.size());

    const Json& hist = field(j, "history", "model");
    if (!hist.is_array()) throw SchemaError("history must be an array");
    std::vector<HistoryStep> history;
    for (std::size_t i = 0; i < hist.size(); ++i) {
        const std::string where = "history[" + std::to_string(i) + "]";
        HistoryStep h;
        h.t = static_cast<int>(integer(hist[i], "t", where));
        h.C = number(hist[i], "C", where);
        h.samples = matrix_from(field(hist[i], "samples", where), where + ".samples");
        h.coefficients = vector_from(field(hist[i], "coefficients", where), where + ".coefficients");
        history.push_back(std::move(h));
    }
    const double bias = number(j, "bias", "model");
    const int t = static_cast<int>(integer(j, "t", "model"));
    try {
        return SeqMedModel::restore(std::move(kernel), schedule, solver, std::move(history), bias, t);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(e.what());
    }
}

SeqLapMedModel seqlapmed_from(const Json& j) {
    check_header(j, "seqlapmed");
    KernelSpec kernel = kernel_from(field(j, "kernel", "model"));
    LapConfig config;
    config.solver = solver_from(field(j, "solver", "model"));
    const Json& c = field(j, "config", "model");
    config.gamma_A = number(c, "gamma_A", "config");
    config.gamma_I = number(c, "gamma_I", "config");
    try {
        config.mode = lap_mode_from_string(text(c, "mode", "config"));
    } catch (const std::invalid_argument& e) {
        throw SchemaError(std::string("config: ") + e.what());
    }
    config.knn = static_cast<int>(integer(c, "knn", "config"));
    config.heat_width = number(c, "heat_width", "config");
    config.rank = static_cast<int>(integer(c, "rank", "config"));
    config.C_override = number(c, "C_override", "config");

    const Json& js = field(j, "steps", "model");
    if (!js.is_array()) throw SchemaError("steps must be an array");
    std::vector<LapStep> steps;
    for (std::size_t i = 0; i < js.size(); ++i) {
        const std::string where = "steps[" + std::to_string(i) + "]";
        const Json& e = js[i];
        LapStep s;
        s.t = static_cast<int>(integer(e, "t", where));
        s.params.C = number(e, "C", where);
        s.params.beta = number(e, "beta", where);
        s.X = matrix_from(field(e, "X", where), where + ".X");
        s.y = vector_from(field(e, "y", where), where + ".y");
        s.laplacian = matrix_from(field(e, "laplacian", where), where + ".laplacian");
        const Vector labeled = vector_from(field(e, "labeled", where), where + ".labeled");
        for (Eigen::Index k = 0; k < labeled.size(); ++k) s.labeled.push_back(static_cast<Eigen::Index>(labeled(k)));
        s.sv_samples = matrix_from(field(e, "sv_samples", where), where + ".sv_samples");
        s.coefficients = vector_from(field(e, "coefficients", where), where + ".coefficients");
        if (s.y.size() != s.X.rows() || s.sv_samples.rows() != s.coefficients.size()) {
            throw SchemaError(where + ": inconsistent sizes");
        }
        steps.push_back(std::move(s));
    }
    ApproxState running = approx_from(field(j, "running", "model"), "running");
    const long long prior_steps = integer(j, "prior_steps", "model");
    ApproxState prior = approx_from(field(j, "prior", "model"), "prior");
    const double bias = number(j, "bias", "model");
    const int t = static_cast<int>(integer(j, "t", "model"));
    if (prior_steps < 0) throw SchemaError("prior_steps must be nonnegative");
    try {
        return SeqLapMedModel::restore(std::move(kernel), config, std::move(steps), std::move(running),
                                       std::move(prior), static_cast<std::size_t>(prior_steps), bias, t);
    } catch (const std::invalid_argument& e) {
        throw SchemaError(e.what());
    }
}

// Names the first expected top-level key absent from unparseable text.
std::string diagnose_truncation(const std::string& raw, const nlohmann::json::parse_error& err) {
    const bool lap = raw.find("\"seqlapmed\"") != std::string::npos;
    const auto& fields = lap ? std::vector<const char*>(std::begin(kLapFields), std::end(kLapFields))
                             : std::vector<const char*>(std::begin(kSeqMedFields), std::end(kSeqMedFields));
    for (const char* name : fields) {
        if (raw.find("\"" + std::string(name) + "\":") == std::string::npos) {
            return "missing field '" + std::string(name) + "' in model (file truncated at byte " +
                   std::to_string(err.byte) + ")";
        }
    }
    return std::string("malformed model file: ") + err.what();
}

}  // namespace

std::string model_to_json(const SeqMedModel& model) {
    Json j;
    j["version"] = kModelFormatVersion;
    j["type"] = "seqmed";
    j["kernel"] = kernel_json(model.kernel());
    j["solver"] = solver_json(model.solver_options());
    Json per_step = Json::array();
    for (double c : model.schedule().per_step) per_step.push_back(c);
    j["C_schedule"] = Json{{"constant", model.schedule().constant}, {"per_step", std::move(per_step)}};
    Json history = Json::array();
    for (const auto& h : model.history()) {
        history.push_back(Json{{"t", h.t},
                               {"C", h.C},
                               {"samples", matrix_json(h.samples)},
                               {"coefficients", vector_json(h.coefficients)}});
    }
    j["history"] = std::move(history);
    j["bias"] = model.bias();
    j["t"] = model.time();
    return j.dump() + "\n";
}

std::string model_to_json(const SeqLapMedModel& model) {
    const LapConfig& c = model.config();
    Json j;
    j["version"] = kModelFormatVersion;
    j["type"] = "seqlapmed";
    j["kernel"] = kernel_json(model.kernel());
    j["solver"] = solver_json(c.solver);
    j["config"] = Json{{"gamma_A", c.gamma_A}, {"gamma_I", c.gamma_I}, {"mode", to_string(c.mode)},
                       {"knn", c.knn},         {"heat_width", c.heat_width}, {"rank", c.rank},
                       {"C_override", c.C_override}};
    Json steps = Json::array();
    for (const auto& s : model.steps()) {
        Json labeled = Json::array();
        for (Eigen::Index i : s.labeled) labeled.push_back(i);
        steps.push_back(Json{{"t", s.t},
                             {"C", s.params.C},
                             {"beta", s.params.beta},
                             {"X", matrix_json(s.X)},
                             {"y", vector_json(s.y)},
                             {"laplacian", matrix_json(s.laplacian)},
                             {"labeled", std::move(labeled)},
                             {"sv_samples", matrix_json(s.sv_samples)},
                             {"coefficients", vector_json(s.coefficients)}});
    }
    j["steps"] = std::move(steps);
    j["running"] = approx_json(model.running_state());
    j["prior_steps"] = model.prior_steps();
    j["prior"] = approx_json(model.prior_state());
    j["bias"] = model.bias();
    j["t"] = model.time();
    return j.dump() + "\n";
}

AnyModel model_from_json(const std::string& raw) {
    Json j;
    try {
        j = Json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
        throw SchemaError(diagnose_truncation(raw, e));
    }
    try {
        const std::string type = text(j, "type", "model");
        if (type == "seqmed") return seqmed_from(j);
        if (type == "seqlapmed") return seqlapmed_from(j);
        throw SchemaError("unknown model type '" + type + "'");
    } catch (const nlohmann::json::exception& e) {
        throw SchemaError(std::string("malformed model file: ") + e.what());
    }
}

void save_model(const SeqMedModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(model));
}

void save_model(const SeqLapMedModel& model, const std::filesystem::path& path) {
    write_file_atomic(path, model_to_json(model));
}

void save_model(const AnyModel& model, const std::filesystem::path& path) {
    std::visit([&](const auto& m) { save_model(m, path); }, model);
}

AnyModel load_model(const std::filesystem::path& path) { return model_from_json(read_file(path)); }

Vector decision_values(const AnyModel& model, const Matrix& X) {
    return std::visit([&](const auto& m) { return m.decision_values(X); }, model);
}

FitReport partial_fit(AnyModel& model, const Batch& batch) {
    return std::visit([&](auto& m) { return m.partial_fit(batch); }, model);
}

int model_time(const AnyModel& model) {
    return std::visit([](const auto& m) { return m.time(); }, model);
}

std::size_t support_vector_count(const AnyModel& model) {
    return std::visit([](const auto& m) { return m.support_vector_count(); }, model);
}

}  // namespace seqmed
