#include "simm/cli.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "simm/analysis.hpp"
#include "simm/elicit.hpp"
#include "simm/error.hpp"
#include "simm/ffvb.hpp"
#include "simm/geometry.hpp"
#include "simm/io.hpp"
#include "simm/mcmc.hpp"
#include "simm/plot.hpp"

namespace simm {

namespace fs = std::filesystem;

namespace {

fs::path output_dir(const std::string& flag) {
    if (!flag.empty()) return flag;
    if (const char* env = std::getenv("SIMM_OUTPUT_DIR"); env && *env) return env;
    return ".";
}

struct DataArgs {
    std::string mixtures;
    std::string sources;
    std::string corrections;
    std::string concentrations;
    std::string group_column;

    void add(CLI::App& app) {
        app.add_option("--mixtures", mixtures, "Mixtures CSV: one column per tracer, optional group column")
            ->required();
        app.add_option("--sources", sources, "Sources CSV: source, <tracer>_mean, <tracer>_sd")->required();
        app.add_option("--corrections", corrections, "Corrections CSV, same layout as sources");
        app.add_option("--concentrations", concentrations, "Concentrations CSV: source, <tracer>");
        app.add_option("--group-column", group_column, "Group column in the mixtures file (default: group)");
    }

    SimmInput load() const {
        io::LoadOptions o;
        o.mixtures = mixtures;
        o.sources = sources;
        if (!corrections.empty()) o.corrections = corrections;
        if (!concentrations.empty()) o.concentrations = concentrations;
        if (!group_column.empty()) {
            o.group_column = group_column;
            o.group_column_required = true;
        }
        return io::load(o);
    }
};

std::vector<std::size_t> resolve_groups(const PosteriorOutput& run, const std::vector<std::string>& names) {
    std::vector<std::size_t> ids;
    if (names.empty()) {
        for (std::size_t g = 0; g < run.groups.size(); ++g) ids.push_back(g);
    }
    for (const auto& n : names) ids.push_back(run.group_index(n));
    return ids;
}

std::size_t single_group(const PosteriorOutput& run, const std::string& name) {
    if (name.empty()) {
        if (run.groups.size() > 1) {
            throw ValidationError(ValidationCode::UnknownGroup,
                                  "run has " + std::to_string(run.groups.size()) + " groups; pass --group");
        }
        return 0;
    }
    return run.group_index(name);
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
    for (const auto& w : warnings) err << "warning: " << w << '\n';
}

void write_pair(const fs::path& dir, const std::string& stem, const std::string& svg, const std::string& csv,
                std::ostream& out) {
    io::write_file_atomic(dir / (stem + ".svg"), svg);
    io::write_file_atomic(dir / (stem + ".csv"), csv);
    out << "wrote " << (dir / (stem + ".svg")).string() << " and " << (dir / (stem + ".csv")).string() << '\n';
}

// Group names may contain spaces or path separators.
std::string file_stem(std::string s) {
    for (char& c : s) {
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '.')) c = '_';
    }
    return s;
}

Vector parse_vector(const std::vector<double>& v) {
    return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

}  // namespace

int cli_dispatch(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian stable isotope mixing models", "simm"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(io::library_version()));

    std::function<void()> action;

    // check
    DataArgs check_data;
    bool check_json = false;
    auto* check = app.add_subcommand("check", "Test whether mixtures lie inside the mixing region");
    check_data.add(*check);
    check->add_flag("--json", check_json, "Print the report as JSON");
    check->callback([&] {
        action = [&] {
            const SimmInput input = check_data.load();
            const auto report = in_mixing_region(input);
            out << (check_json ? report.to_json(input) + "\n" : report.to_text(input));
        };
    });

    // fit
    DataArgs fit_data;
    std::string method = "mcmc";
    std::string fit_output;
    std::string fit_priors;
    std::uint64_t seed = kDefaultSeed;
    McmcControl mcmc;
    FfvbControl ffvb;
    auto* fit = app.add_subcommand("fit", "Fit the model and write a run artifact");
    fit_data.add(*fit);
    fit->add_option("--method", method, "Inference backend")->check(CLI::IsMember({"mcmc", "ffvb"}));
    fit->add_option("--output,-o", fit_output, "Run artifact path (default: $SIMM_OUTPUT_DIR/run.json)");
    fit->add_option("--priors", fit_priors, "Priors JSON, e.g. written by `simm elicit`");
    fit->add_option("--seed", seed, "Random seed");
    fit->add_option("--chains", mcmc.n_chains, "MCMC chains");
    fit->add_option("--iterations", mcmc.iterations, "MCMC iterations per chain");
    fit->add_option("--burn-in", mcmc.burn_in, "MCMC burn-in iterations");
    fit->add_option("--thin", mcmc.thin, "MCMC thinning interval");
    fit->add_option("--samples", ffvb.S, "FFVB Monte Carlo samples per iteration");
    fit->add_option("--max-iterations", ffvb.max_iterations, "FFVB iteration limit");
    fit->add_option("--learning-rate", ffvb.eps0, "FFVB base learning rate");
    fit->add_option("--patience", ffvb.P, "FFVB patience");
    fit->add_option("--window", ffvb.t_W, "FFVB moving-average window");
    fit->callback([&] {
        action = [&] {
            const SimmInput input = fit_data.load();
            const Priors priors = fit_priors.empty()
                                      ? Priors::defaults(input.n_sources())
                                      : io::priors_from_json(io::read_file(fit_priors), input.n_sources());
            const auto report = in_mixing_region(input);
            if (!report.all_inside()) {
                err << "warning: some mixtures lie outside the mixing region; run `simm check` for details\n";
            }
            PosteriorOutput run = [&] {
                if (method == "mcmc") {
                    mcmc.seed = seed;
                    return run_mcmc(input, priors, mcmc);
                }
                ffvb.seed = seed;
                return run_ffvb(input, priors, ffvb);
            }();
            print_warnings(run.warnings, err);
            const fs::path path = fit_output.empty() ? output_dir("") / "run.json" : fs::path(fit_output);
            io::save_run(run, path);
            out << "wrote " << path.string() << " (" << method << ", " << run.groups.size() << " group"
                << (run.groups.size() == 1 ? "" : "s") << ")\n";
            if (run.backend == Backend::Ffvb) {
                fs::path trace = path;
                trace.replace_extension(".trace.csv");
                io::write_file_atomic(trace, io::trace_csv(run));
                out << "wrote " << trace.string() << '\n';
            }
        };
    });

    // summary
    std::string run_path;
    std::string summary_type = "statistics";
    std::vector<std::string> groups;
    bool as_csv = false;
    auto* summary = app.add_subcommand("summary", "Print posterior summaries from a run artifact");
    summary->add_option("--run", run_path, "Run artifact")->required();
    summary->add_option("--type", summary_type, "Summary type")
        ->check(CLI::IsMember({"diagnostics", "statistics", "quantiles", "correlations"}));
    summary->add_option("--group", groups, "Group name (repeatable; default all)");
    summary->add_flag("--csv", as_csv, "Print CSV instead of a text table");
    summary->callback([&] {
        action = [&] {
            const PosteriorOutput run = io::load_run(run_path);
            const SummaryType type = summary_type_from_string(summary_type);
            for (auto g : resolve_groups(run, groups)) {
                const SummaryTable t = summarize(run, type, g);
                out << (as_csv ? t.to_csv() : t.to_text()) << (as_csv ? "" : "\n");
            }
        };
    });

    // compare-groups
    std::string cmp_source;
    auto* cmp_groups = app.add_subcommand("compare-groups", "Compare one source's proportion across groups");
    cmp_groups->add_option("--run", run_path, "Run artifact")->required();
    cmp_groups->add_option("--source", cmp_source, "Source name")->required();
    cmp_groups->add_option("--group", groups, "Group names (repeatable; default all)");
    cmp_groups->callback([&] {
        action = [&] {
            const PosteriorOutput run = io::load_run(run_path);
            out << compare_groups(run, cmp_source, resolve_groups(run, groups)).to_text();
        };
    });

    // compare-sources
    std::vector<std::string> sources;
    std::string group;
    auto* cmp_sources = app.add_subcommand("compare-sources", "Compare sources within one group");
    cmp_sources->add_option("--run", run_path, "Run artifact")->required();
    cmp_sources->add_option("--source", sources, "Source names (repeatable, at least 2)")->required();
    cmp_sources->add_option("--group", group, "Group name");
    cmp_sources->callback([&] {
        action = [&] {
            const PosteriorOutput run = io::load_run(run_path);
            out << compare_sources(run, sources, single_group(run, group)).to_text();
        };
    });

    // combine
    std::string new_name;
    std::string combine_output;
    auto* combine = app.add_subcommand("combine", "Combine sources after fitting");
    combine->add_option("--run", run_path, "Run artifact")->required();
    combine->add_option("--source", sources, "Sources to combine (repeatable, at least 2)")->required();
    combine->add_option("--name", new_name, "Name of the combined source")->required();
    combine->add_option("--output,-o", combine_output, "Output artifact (default: $SIMM_OUTPUT_DIR/combined.json)");
    combine->callback([&] {
        action = [&] {
            const PosteriorOutput combined = combine_sources(io::load_run(run_path), sources, new_name);
            const fs::path path = combine_output.empty() ? output_dir("") / "combined.json" : fs::path(combine_output);
            io::save_run(combined, path);
            out << "wrote " << path.string() << '\n';
        };
    });

    // predictive
    double prob = 0.5;
    std::string predictive_csv;
    auto* predictive = app.add_subcommand("predictive", "Posterior predictive interval check");
    predictive->add_option("--run", run_path, "Run artifact")->required();
    predictive->add_option("--group", group, "Group name");
    predictive->add_option("--prob", prob, "Central interval probability");
    predictive->add_option("--seed", seed, "Random seed");
    predictive->add_option("--csv", predictive_csv, "Write per-observation intervals to this CSV");
    predictive->callback([&] {
        action = [&] {
            const PosteriorOutput run = io::load_run(run_path);
            const PredictiveCheck check = posterior_predictive(run, run.input, single_group(run, group), prob, seed);
            out << "group " << check.group << ": " << check.rows.size() << " observed values, "
                << check.coverage * 100.0 << "% inside the " << prob * 100.0 << "% predictive interval\n";
            if (!predictive_csv.empty()) {
                io::write_file_atomic(predictive_csv, check.to_csv(run.tracer_names()));
                out << "wrote " << predictive_csv << '\n';
            }
        };
    });

    // elicit
    std::vector<double> means, sds;
    std::string targets_file;
    std::string elicit_output;
    ElicitControl elicit_control;
    auto* elicit_cmd = app.add_subcommand("elicit", "Find prior hyperparameters matching target proportion moments");
    auto* means_opt = elicit_cmd->add_option("--means", means, "Target means, comma separated")->delimiter(',');
    elicit_cmd->add_option("--sds", sds, "Target sds, comma separated")->delimiter(',')->needs(means_opt);
    elicit_cmd->add_option("--targets", targets_file, "JSON file with {\"means\": [...], \"sds\": [...]}")
        ->excludes(means_opt);
    elicit_cmd->add_option("--n-sim", elicit_control.n_sim, "Monte Carlo draws per objective evaluation");
    elicit_cmd->add_option("--seed", elicit_control.seed, "Random seed");
    elicit_cmd->add_option("--output,-o", elicit_output, "Write priors JSON here instead of stdout");
    elicit_cmd->callback([&] {
        action = [&] {
            if (!targets_file.empty()) {
                nlohmann::json j;
                const std::string text = io::read_file(targets_file);
                try {
                    j = nlohmann::json::parse(text);
                    means = j.at("means").get<std::vector<double>>();
                    sds = j.at("sds").get<std::vector<double>>();
                } catch (const nlohmann::json::parse_error& e) {
                    throw ParseError(std::string("invalid targets JSON: ") + e.what(), e.byte);
                } catch (const nlohmann::json::exception& e) {
                    throw ValidationError(ValidationCode::InvalidArgument,
                                          std::string("targets JSON needs means and sds arrays: ") + e.what());
                }
            }
            if (means.empty()) {
                throw ValidationError(ValidationCode::InvalidArgument, "pass --means and --sds or --targets");
            }
            const ElicitResult r = elicit(parse_vector(means), parse_vector(sds), elicit_control);
            print_warnings(r.warnings, err);
            const std::string text = io::priors_to_json(r.to_priors());
            if (elicit_output.empty()) {
                out << text;
            } else {
                io::write_file_atomic(elicit_output, text);
                out << "wrote " << elicit_output << '\n';
            }
        };
    });

    // plot
    std::string plot_type = "boxplot";
    std::string plot_dir;
    DataArgs plot_data;
    std::string x_label, y_label;
    auto* plot_cmd = app.add_subcommand("plot", "Write SVG plots and their CSV data");
    plot_cmd->add_option("--type", plot_type, "Plot type")
        ->check(CLI::IsMember({"isospace", "boxplot", "matrix", "density", "prior"}));
    plot_cmd->add_option("--run", run_path, "Run artifact (all types except isospace)");
    plot_cmd->add_option("--mixtures", plot_data.mixtures, "Mixtures CSV (isospace)");
    plot_cmd->add_option("--sources", plot_data.sources, "Sources CSV (isospace)");
    plot_cmd->add_option("--corrections", plot_data.corrections, "Corrections CSV (isospace)");
    plot_cmd->add_option("--concentrations", plot_data.concentrations, "Concentrations CSV (isospace)");
    plot_cmd->add_option("--group-column", plot_data.group_column, "Group column (isospace)");
    plot_cmd->add_option("--group", groups, "Group names (repeatable; default all)");
    plot_cmd->add_option("--xlab", x_label, "x-axis label (isospace)");
    plot_cmd->add_option("--ylab", y_label, "y-axis label (isospace)");
    plot_cmd->add_option("--seed", seed, "Random seed for prior draws");
    plot_cmd->add_option("--output-dir", plot_dir, "Directory for plots (default: $SIMM_OUTPUT_DIR or .)");
    plot_cmd->callback([&] {
        action = [&] {
            const fs::path dir = output_dir(plot_dir);
            if (plot_type == "isospace") {
                if (plot_data.mixtures.empty() || plot_data.sources.empty()) {
                    throw ValidationError(ValidationCode::InvalidArgument,
                                          "isospace plots need --mixtures and --sources");
                }
                const SimmInput input = plot_data.load();
                const auto names = groups.empty() ? input.group_names() : groups;
                const auto data = isospace_plot_data(input, names, x_label, y_label);
                write_pair(dir, "isospace", plot::isospace_svg(data), data.to_csv(), out);
                return;
            }
            if (run_path.empty()) {
                throw ValidationError(ValidationCode::InvalidArgument, plot_type + " plots need --run");
            }
            const PosteriorOutput run = io::load_run(run_path);
            for (auto g : resolve_groups(run, groups)) {
                const std::string stem = plot_type + "_" + file_stem(run.groups[g].name);
                if (plot_type == "boxplot") {
                    const auto d = boxplot_data(run, g);
                    write_pair(dir, stem, plot::boxplot_svg(d), d.to_csv(), out);
                } else if (plot_type == "density") {
                    const auto d = density_data(run, g);
                    write_pair(dir, stem, plot::density_svg(d), d.to_csv(), out);
                } else if (plot_type == "matrix") {
                    const auto d = matrix_plot_data(run, g);
                    write_pair(dir, stem, plot::matrix_svg(d), d.to_csv(), out);
                } else {
                    const auto d = prior_viz_data(run, g, 3600, seed);
                    write_pair(dir, stem, plot::prior_svg(d), d.to_csv(), out);
                }
            }
        };
    });

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return 1;
    }

    try {
        action();
        return 0;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const SchemaVersionError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const UnsupportedError& e) {
        err << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    }
}

}  // namespace simm
