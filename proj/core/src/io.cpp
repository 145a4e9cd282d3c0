#include "simm/io.hpp"

#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "json.hpp"

#include "simm/error.hpp"

#ifndef SIMM_VERSION
#define SIMM_VERSION "0.0.0"
#endif

namespace simm::io {

using nlohmann::json;
namespace fs = std::filesystem;

std::string_view library_version() { return SIMM_VERSION; }

namespace {

std::string context(const csv::Table& t) { return "in " + t.source; }

int require_column(const csv::Table& t, const std::string& name) {
    const int c = t.column(name);
    if (c < 0) {
        throw ValidationError(ValidationCode::MissingColumn,
                              "column '" + name + "' not found " + context(t));
    }
    return c;
}

// Reads a source-indexed table (`source` column plus value columns) and
// returns rows ordered like `source_names`.
struct SourceRows {
    std::vector<std::string> names;
    std::vector<std::size_t> rows;
};

SourceRows source_rows(const csv::Table& t, const std::vector<std::string>* expected) {
    const int sc = require_column(t, "source");
    SourceRows out;
    std::vector<std::string> found;
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const std::string& name = t.rows[r][static_cast<std::size_t>(sc)];
        if (name.empty()) {
            throw ValidationError(ValidationCode::InvalidArgument,
                                  "empty source name at row " + std::to_string(r + 1) + " " + context(t));
        }
        if (std::find(found.begin(), found.end(), name) != found.end()) {
            throw ValidationError(ValidationCode::DuplicateName,
                                  "source '" + name + "' appears twice " + context(t));
        }
        found.push_back(name);
    }
    if (!expected) {
        out.names = found;
        for (std::size_t r = 0; r < found.size(); ++r) out.rows.push_back(r);
        return out;
    }
    for (const auto& name : found) {
        if (std::find(expected->begin(), expected->end(), name) == expected->end()) {
            throw ValidationError(ValidationCode::UnknownSource,
                                  "source '" + name + "' " + context(t) + " is not in the sources table");
        }
    }
    for (const auto& name : *expected) {
        auto it = std::find(found.begin(), found.end(), name);
        if (it == found.end()) {
            throw ValidationError(ValidationCode::DimensionMismatch,
                                  "source '" + name + "' has no row " + context(t));
        }
        out.rows.push_back(static_cast<std::size_t>(it - found.begin()));
    }
    out.names = *expected;
    return out;
}

void check_tracer_columns(const csv::Table& t, const std::vector<std::string>& tracers,
                          const std::vector<std::string>& suffixes) {
    for (std::size_t c = 0; c < t.header.size(); ++c) {
        const std::string& h = t.header[c];
        if (h == "source") continue;
        bool known = false;
        for (const auto& tr : tracers) {
            for (const auto& suf : suffixes) known = known || h == tr + suf;
        }
        if (!known) {
            throw ValidationError(ValidationCode::UnknownTracer,
                                  "column '" + h + "' " + context(t) +
                                      " does not match any mixture tracer");
        }
    }
}

std::pair<Matrix, Matrix> mean_sd_table(const csv::Table& t, const SourceRows& rows,
                                        const std::vector<std::string>& tracers) {
    check_tracer_columns(t, tracers, {"_mean", "_sd"});
    const auto k = static_cast<Index>(rows.rows.size());
    const auto j = static_cast<Index>(tracers.size());
    Matrix means(k, j), sds(k, j);
    for (Index tr = 0; tr < j; ++tr) {
        const auto& name = tracers[static_cast<std::size_t>(tr)];
        const auto mc = static_cast<std::size_t>(require_column(t, name + "_mean"));
        const auto dc = static_cast<std::size_t>(require_column(t, name + "_sd"));
        for (Index s = 0; s < k; ++s) {
            const auto r = rows.rows[static_cast<std::size_t>(s)];
            means(s, tr) = csv::to_double(t, r, mc);
            sds(s, tr) = csv::to_double(t, r, dc);
            if (sds(s, tr) < 0.0) {
                throw ValidationError(ValidationCode::NegativeSd,
                                      "negative sd at row " + std::to_string(r + 1) + ", column '" +
                                          t.header[dc] + "' " + context(t));
            }
        }
    }
    return {means, sds};
}

json matrix_json(const Matrix& m) {
    json rows = json::array();
    for (Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

json vector_json(const Vector& v) {
    json a = json::array();
    for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Matrix matrix_from(const json& j, Index cols, const char* what) {
    if (!j.is_array()) throw ValidationError(ValidationCode::InvalidArgument, std::string(what) + " must be an array");
    Matrix m(static_cast<Index>(j.size()), cols);
    for (std::size_t r = 0; r < j.size(); ++r) {
        if (!j[r].is_array() || static_cast<Index>(j[r].size()) != cols) {
            throw ValidationError(ValidationCode::DimensionMismatch,
                                  std::string(what) + " row " + std::to_string(r) + " has the wrong length");
        }
        for (Index c = 0; c < cols; ++c) m(static_cast<Index>(r), c) = j[r][static_cast<std::size_t>(c)].get<double>();
    }
    return m;
}

Vector vector_from(const json& j) {
    Vector v(static_cast<Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) v(static_cast<Index>(i)) = j[i].get<double>();
    return v;
}

json priors_json(const Priors& p) {
    return {{"mu0", vector_json(p.mu0)}, {"sigma0", matrix_json(p.sigma0)}, {"a", p.a}, {"b", p.b}};
}

Priors priors_from(const json& j, Index k) {
    Priors p = Priors::defaults(k);
    if (j.contains("mu0")) p.mu0 = vector_from(j.at("mu0"));
    if (j.contains("sigma0")) {
        const json& s = j.at("sigma0");
        if (!s.empty() && s[0].is_number()) {
            p.sigma0 = vector_from(s).asDiagonal();
        } else {
            p.sigma0 = matrix_from(s, static_cast<Index>(s.size()), "sigma0");
        }
    }
    if (j.contains("a")) p.a = j.at("a").get<double>();
    if (j.contains("b")) p.b = j.at("b").get<double>();
    p.validate(k);
    return p;
}

json input_json(const SimmInput& in) {
    return {{"tracer_names", in.tracer_names()},
            {"source_names", in.source_names()},
            {"mixtures", matrix_json(in.mixtures())},
            {"groups", in.group_labels()},
            {"source_means", matrix_json(in.source_means())},
            {"source_sds", matrix_json(in.source_sds())},
            {"correction_means", matrix_json(in.correction_means())},
            {"correction_sds", matrix_json(in.correction_sds())},
            {"concentration_means", matrix_json(in.concentration_means())}};
}

SimmInput input_from(const json& j) {
    SimmData d;
    d.tracer_names = j.at("tracer_names").get<std::vector<std::string>>();
    d.source_names = j.at("source_names").get<std::vector<std::string>>();
    const auto J = static_cast<Index>(d.tracer_names.size());
    d.mixtures = matrix_from(j.at("mixtures"), J, "mixtures");
    d.groups = j.at("groups").get<std::vector<std::string>>();
    d.source_means = matrix_from(j.at("source_means"), J, "source_means");
    d.source_sds = matrix_from(j.at("source_sds"), J, "source_sds");
    d.correction_means = matrix_from(j.at("correction_means"), J, "correction_means");
    d.correction_sds = matrix_from(j.at("correction_sds"), J, "correction_sds");
    d.concentration_means = matrix_from(j.at("concentration_means"), J, "concentration_means");
    return SimmInput(std::move(d));
}

json trace_json(const std::vector<TraceRow>& trace) {
    json a = json::array();
    for (const auto& t : trace) {
        a.push_back({t.iteration, t.lower_bound, t.moving_average ? json(*t.moving_average) : json(nullptr), t.patience});
    }
    return a;
}

std::vector<TraceRow> trace_from(const json& j) {
    std::vector<TraceRow> out;
    for (const auto& r : j) {
        TraceRow t;
        t.iteration = r.at(0).get<int>();
        t.lower_bound = r.at(1).is_null() ? std::numeric_limits<double>::quiet_NaN() : r.at(1).get<double>();
        if (!r.at(2).is_null()) t.moving_average = r.at(2).get<double>();
        t.patience = r.at(3).get<int>();
        out.push_back(t);
    }
    return out;
}

std::size_t draw_values(const PosteriorOutput& out) {
    std::size_t n = 0;
    for (const auto& g : out.groups) {
        n += static_cast<std::size_t>(g.n_draws()) * static_cast<std::size_t>(g.p.cols() + g.sigma.cols() + 2);
    }
    return n;
}

std::vector<std::string> draws_header(const PosteriorOutput& output) {
    std::vector<std::string> h{"group", "draw", "chain", "deviance"};
    h.insert(h.end(), output.source_names.begin(), output.source_names.end());
    for (const auto& t : output.tracer_names()) h.push_back("sd[" + t + "]");
    return h;
}

void read_draws_csv(PosteriorOutput& out, const csv::Table& t) {
    const auto expected = draws_header(out);
    if (t.header != expected) {
        throw ValidationError(ValidationCode::MissingColumn, "draws file " + t.source + " has an unexpected header");
    }
    const auto k = static_cast<Index>(out.source_names.size());
    const auto J = static_cast<Index>(out.tracer_names().size());
    std::vector<std::vector<std::size_t>> rows(out.groups.size());
    for (std::size_t r = 0; r < t.rows.size(); ++r) {
        rows[out.group_index(t.rows[r][0])].push_back(r);
    }
    for (std::size_t g = 0; g < out.groups.size(); ++g) {
        auto& gd = out.groups[g];
        const auto n = static_cast<Index>(rows[g].size());
        gd.p.resize(n, k);
        gd.sigma.resize(n, J);
        gd.deviance.resize(n);
        gd.chain.assign(static_cast<std::size_t>(n), 0);
        for (Index i = 0; i < n; ++i) {
            const auto r = rows[g][static_cast<std::size_t>(i)];
            gd.chain[static_cast<std::size_t>(i)] = static_cast<int>(csv::to_double(t, r, 2));
            gd.deviance(i) = csv::to_double(t, r, 3);
            for (Index c = 0; c < k; ++c) gd.p(i, c) = csv::to_double(t, r, static_cast<std::size_t>(4 + c));
            for (Index c = 0; c < J; ++c) gd.sigma(i, c) = csv::to_double(t, r, static_cast<std::size_t>(4 + k + c));
        }
    }
}

}  // namespace

SimmInput load_tables(const csv::Table& mixtures, const csv::Table& sources,
                      const csv::Table* corrections, const csv::Table* concentrations,
                      const std::string& group_column, bool group_column_required) {
    SimmData d;
    int gc = mixtures.column(group_column);
    if (gc < 0 && group_column_required) require_column(mixtures, group_column);
    std::vector<std::size_t> tracer_cols;
    for (std::size_t c = 0; c < mixtures.header.size(); ++c) {
        if (static_cast<int>(c) == gc) continue;
        if (mixtures.header[c].empty()) {
            throw ValidationError(ValidationCode::MissingColumn,
                                  "column " + std::to_string(c + 1) + " has an empty header " + context(mixtures));
        }
        d.tracer_names.push_back(mixtures.header[c]);
        tracer_cols.push_back(c);
    }
    if (d.tracer_names.empty()) {
        throw ValidationError(ValidationCode::MissingColumn, "no tracer columns " + context(mixtures));
    }
    if (mixtures.rows.empty()) {
        throw ValidationError(ValidationCode::DimensionMismatch, "no mixture rows " + context(mixtures));
    }
    d.mixtures.resize(static_cast<Index>(mixtures.rows.size()), static_cast<Index>(tracer_cols.size()));
    for (std::size_t r = 0; r < mixtures.rows.size(); ++r) {
        for (std::size_t c = 0; c < tracer_cols.size(); ++c) {
            d.mixtures(static_cast<Index>(r), static_cast<Index>(c)) = csv::to_double(mixtures, r, tracer_cols[c]);
        }
        if (gc >= 0) {
            const std::string& label = mixtures.rows[r][static_cast<std::size_t>(gc)];
            if (label.empty()) {
                throw ValidationError(ValidationCode::EmptyGroup,
                                      "empty group label at row " + std::to_string(r + 1) + " " + context(mixtures));
            }
            d.groups.push_back(label);
        }
    }

    const SourceRows rows = source_rows(sources, nullptr);
    if (rows.names.size() < 2) {
        throw ValidationError(ValidationCode::TooFewSources,
                              "at least 2 sources are required, " + context(sources) + " has " +
                                  std::to_string(rows.names.size()));
    }
    d.source_names = rows.names;
    std::tie(d.source_means, d.source_sds) = mean_sd_table(sources, rows, d.tracer_names);

    if (corrections) {
        const SourceRows cr = source_rows(*corrections, &d.source_names);
        auto [m, s] = mean_sd_table(*corrections, cr, d.tracer_names);
        d.correction_means = m;
        d.correction_sds = s;
    }
    if (concentrations) {
        const SourceRows cr = source_rows(*concentrations, &d.source_names);
        check_tracer_columns(*concentrations, d.tracer_names, {""});
        Matrix q(static_cast<Index>(cr.rows.size()), static_cast<Index>(d.tracer_names.size()));
        for (std::size_t t = 0; t < d.tracer_names.size(); ++t) {
            const auto c = static_cast<std::size_t>(require_column(*concentrations, d.tracer_names[t]));
            for (std::size_t s = 0; s < cr.rows.size(); ++s) {
                q(static_cast<Index>(s), static_cast<Index>(t)) = csv::to_double(*concentrations, cr.rows[s], c);
            }
        }
        d.concentration_means = q;
    }
    return SimmInput(std::move(d));
}

SimmInput load(const LoadOptions& options) {
    const csv::Table mixtures = csv::read_file(options.mixtures);
    const csv::Table sources = csv::read_file(options.sources);
    std::optional<csv::Table> corrections, concentrations;
    if (options.corrections) corrections = csv::read_file(*options.corrections);
    if (options.concentrations) concentrations = csv::read_file(*options.concentrations);
    return load_tables(mixtures, sources, corrections ? &*corrections : nullptr,
                       concentrations ? &*concentrations : nullptr, options.group_column,
                       options.group_column_required);
}

void write_file_atomic(const fs::path& path, std::string_view content) {
    const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
    if (!fs::exists(dir)) fs::create_directories(dir);
    std::random_device rd;
    const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(rd()));
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot open " + tmp.string() + " for writing");
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        out.flush();
        if (!out) {
            out.close();
            fs::remove(tmp);
            throw Error("failed writing " + tmp.string());
        }
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) {
        fs::remove(tmp);
        throw Error("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
    }
}

std::string read_file(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ValidationError(ValidationCode::FileNotFound, "cannot open '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::string priors_to_json(const Priors& priors) { return priors_json(priors).dump(2) + "\n"; }

Priors priors_from_json(std::string_view text, Index n_sources) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("invalid priors JSON: ") + e.what(), e.byte);
    }
    try {
        return priors_from(j, n_sources);
    } catch (const json::exception& e) {
        throw ValidationError(ValidationCode::InvalidArgument, std::string("invalid priors JSON: ") + e.what());
    }
}

std::string run_to_json(const PosteriorOutput& output, const std::string* draws_file, std::string* draws_out) {
    const bool external = draws_file && draws_out && draw_values(output) > kEmbedLimit;
    json meta{{"version", library_version()},
              {"backend", to_string(output.backend)},
              {"seed", output.seed},
              {"priors", priors_json(output.priors)}};
    if (output.mcmc_control) {
        const auto& c = *output.mcmc_control;
        meta["controls"] = {{"n_chains", c.n_chains}, {"iterations", c.iterations}, {"burn_in", c.burn_in},
                            {"thin", c.thin}, {"seed", c.seed}, {"target_acceptance", c.target_acceptance},
                            {"adaptation_window", c.adaptation_window}};
    } else if (output.ffvb_control) {
        const auto& c = *output.ffvb_control;
        meta["controls"] = {{"S", c.S}, {"beta1", c.beta1}, {"beta2", c.beta2}, {"eps0", c.eps0},
                            {"alpha", c.alpha}, {"t_W", c.t_W}, {"P", c.P},
                            {"max_iterations", c.max_iterations}, {"n_output_draws", c.n_output_draws},
                            {"seed", c.seed}};
    }

    json groups = json::array();
    for (const auto& g : output.groups) {
        json gj{{"name", g.name}, {"solo", g.solo}, {"iterations", g.iterations},
                {"acceptance", g.acceptance}, {"trace", trace_json(g.trace)}};
        if (!external) {
            gj["draws"] = {{"chain", g.chain}, {"deviance", vector_json(g.deviance)},
                           {"p", matrix_json(g.p)}, {"sigma", matrix_json(g.sigma)}};
        }
        groups.push_back(std::move(gj));
    }
    json j{{"schema_version", kSchemaVersion},
           {"metadata", std::move(meta)},
           {"input", input_json(output.input)},
           {"source_names", output.source_names},
           {"source_map", output.source_map},
           {"warnings", output.warnings},
           {"groups", std::move(groups)}};
    if (external) {
        j["draws_file"] = *draws_file;
        *draws_out = draws_csv(output);
    }
    return j.dump() + "\n";
}

PosteriorOutput run_from_json(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("run artifact is not valid JSON: ") + e.what(), e.byte);
    }
    try {
        if (!j.is_object() || !j.contains("schema_version")) {
            throw ValidationError(ValidationCode::Parse, "run artifact has no schema_version field");
        }
        const int version = j.at("schema_version").get<int>();
        if (version != kSchemaVersion) throw SchemaVersionError(version, kSchemaVersion);

        const json& meta = j.at("metadata");
        SimmInput input = input_from(j.at("input"));
        const Index k = input.n_sources();
        PosteriorOutput out{.backend = backend_from_string(meta.at("backend").get<std::string>()),
                            .input = std::move(input),
                            .priors = priors_from(meta.at("priors"), k),
                            .mcmc_control = std::nullopt,
                            .ffvb_control = std::nullopt,
                            .seed = meta.at("seed").get<std::uint64_t>(),
                            .source_names = j.at("source_names").get<std::vector<std::string>>(),
                            .source_map = j.at("source_map").get<std::vector<std::vector<Index>>>(),
                            .groups = {},
                            .warnings = j.at("warnings").get<std::vector<std::string>>()};
        if (meta.contains("controls")) {
            const json& c = meta.at("controls");
            if (out.backend == Backend::Mcmc) {
                McmcControl m;
                m.n_chains = c.at("n_chains");
                m.iterations = c.at("iterations");
                m.burn_in = c.at("burn_in");
                m.thin = c.at("thin");
                m.seed = c.at("seed");
                m.target_acceptance = c.at("target_acceptance");
                m.adaptation_window = c.at("adaptation_window");
                out.mcmc_control = m;
            } else {
                FfvbControl f;
                f.S = c.at("S");
                f.beta1 = c.at("beta1");
                f.beta2 = c.at("beta2");
                f.eps0 = c.at("eps0");
                f.alpha = c.at("alpha");
                f.t_W = c.at("t_W");
                f.P = c.at("P");
                f.max_iterations = c.at("max_iterations");
                f.n_output_draws = c.at("n_output_draws");
                f.seed = c.at("seed");
                out.ffvb_control = f;
            }
        }
        const auto J = out.input.n_tracers();
        const auto kout = static_cast<Index>(out.source_names.size());
        for (const auto& gj : j.at("groups")) {
            GroupDraws g;
            g.name = gj.at("name");
            g.solo = gj.at("solo");
            g.iterations = gj.at("iterations");
            g.acceptance = gj.at("acceptance").get<std::vector<double>>();
            g.trace = trace_from(gj.at("trace"));
            if (gj.contains("draws")) {
                const json& d = gj.at("draws");
                g.chain = d.at("chain").get<std::vector<int>>();
                g.deviance = vector_from(d.at("deviance"));
                g.p = matrix_from(d.at("p"), kout, "p");
                g.sigma = matrix_from(d.at("sigma"), J, "sigma");
            }
            out.groups.push_back(std::move(g));
        }
        if (j.contains("draws_file")) {
            const fs::path file = base_dir / j.at("draws_file").get<std::string>();
            read_draws_csv(out, csv::read_file(file.string()));
        }
        check_draws(out);
        return out;
    } catch (const json::exception& e) {
        throw ValidationError(ValidationCode::Parse, std::string("malformed run artifact: ") + e.what());
    }
}

void save_run(const PosteriorOutput& output, const fs::path& path) {
    const std::string sidecar = path.filename().string() + ".draws.csv";
    std::string draws;
    const std::string text = run_to_json(output, &sidecar, &draws);
    if (!draws.empty()) {
        write_file_atomic(path.has_parent_path() ? path.parent_path() / sidecar : fs::path(sidecar), draws);
    }
    write_file_atomic(path, text);
}

PosteriorOutput load_run(const fs::path& path) {
    if (!fs::exists(path)) {
        throw ValidationError(ValidationCode::FileNotFound, "run artifact '" + path.string() + "' does not exist");
    }
    return run_from_json(read_file(path), path.parent_path());
}

std::string trace_csv(const PosteriorOutput& output) {
    std::string out = "group,iteration,lower_bound,moving_average,patience\n";
    for (const auto& g : output.groups) {
        for (const auto& t : g.trace) {
            out += csv::join({g.name, std::to_string(t.iteration), csv::format_double(t.lower_bound),
                              t.moving_average ? csv::format_double(*t.moving_average) : "",
                              std::to_string(t.patience)}) +
                   '\n';
        }
    }
    return out;
}

std::string draws_csv(const PosteriorOutput& output) {
    std::string out = csv::join(draws_header(output)) + '\n';
    for (const auto& g : output.groups) {
        for (Index i = 0; i < g.n_draws(); ++i) {
            std::vector<std::string> f{g.name, std::to_string(i + 1),
                                       std::to_string(g.chain[static_cast<std::size_t>(i)]),
                                       csv::format_double(g.deviance(i))};
            for (Index c = 0; c < g.p.cols(); ++c) f.push_back(csv::format_double(g.p(i, c)));
            for (Index c = 0; c < g.sigma.cols(); ++c) f.push_back(csv::format_double(g.sigma(i, c)));
            out += csv::join(f) + '\n';
        }
    }
    return out;
}

}  // namespace simm::io
