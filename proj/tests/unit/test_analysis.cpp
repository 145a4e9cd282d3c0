#include "doctest.h"

#include "helpers.hpp"
#include "simm/analysis.hpp"
#include "simm/error.hpp"
#include "simm/mcmc.hpp"

using namespace simm;

namespace {

// Four sources, two groups, draws built from a deterministic sequence.
PosteriorOutput synthetic_output() {
    SimmData d;
    d.mixtures.resize(4, 1);
    d.mixtures << 1, 2, 3, 4;
    d.groups = {"g1", "g1", "g2", "g2"};
    d.tracer_names = {"t"};
    d.source_names = {"a", "b", "c", "d"};
    d.source_means.resize(4, 1);
    d.source_means << -3, -1, 1, 3;
    d.source_sds = Matrix::Ones(4, 1);
    PosteriorOutput out{.backend = Backend::Mcmc,
                        .input = SimmInput(d),
                        .priors = Priors::defaults(4),
                        .mcmc_control = McmcControl{},
                        .ffvb_control = std::nullopt,
                        .seed = 1,
                        .source_names = d.source_names,
                        .source_map = identity_source_map(4),
                        .groups = {},
                        .warnings = {}};
    Rng rng = make_rng(4, {4});
    std::normal_distribution<double> n(0, 1);
    for (int g = 0; g < 2; ++g) {
        GroupDraws gd;
        gd.name = g == 0 ? "g1" : "g2";
        const Index rows = 400;
        gd.p.resize(rows, 4);
        gd.sigma.resize(rows, 1);
        gd.deviance.resize(rows);
        for (Index r = 0; r < rows; ++r) {
            Vector f(4);
            f << n(rng) + (g == 0 ? 1.0 : -1.0), n(rng), n(rng), n(rng);
            gd.p.row(r) = clr_inverse(f).transpose();
            gd.sigma(r, 0) = 0.5 + 0.1 * std::abs(n(rng));
            gd.deviance(r) = 10 + n(rng);
            gd.chain.push_back(static_cast<int>(r / 100));
        }
        out.groups.push_back(gd);
    }
    return out;
}

}  // namespace

TEST_CASE("statistics and quantile tables") {
    const auto out = synthetic_output();
    const auto t = summarize(out, SummaryType::Statistics, 0);
    CHECK(t.title == "Summary for g1");
    REQUIRE(t.row_labels == std::vector<std::string>{"deviance", "a", "b", "c", "d", "sd[t]"});
    CHECK(t.col_labels == std::vector<std::string>{"mean", "sd"});
    CHECK(t.values(1, 0) == doctest::Approx(out.groups[0].p.col(0).mean()));
    CHECK(t.values(0, 1) == doctest::Approx(stats::sd(out.groups[0].deviance)));

    const auto q = summarize(out, SummaryType::Quantiles, 1);
    CHECK(q.col_labels == std::vector<std::string>{"2.5%", "25%", "50%", "75%", "97.5%"});
    CHECK(q.values(2, 2) == doctest::Approx(stats::quantile(out.groups[1].p.col(1), 0.5)));

    const auto c = summarize(out, SummaryType::Correlations, 0);
    CHECK(c.values.rows() == 4);
    CHECK(c.values(2, 2) == doctest::Approx(1.0));

    const std::string text = t.to_text();
    CHECK(text.rfind("Summary for g1\n", 0) == 0);
    CHECK(text.find("deviance") != std::string::npos);
    CHECK(t.to_csv().rfind(",mean,sd\n", 0) == 0);

    CHECK(summary_type_from_string("quantiles") == SummaryType::Quantiles);
    CHECK_THROWS_AS(summary_type_from_string("nope"), ValidationError);
}

TEST_CASE("summaries depend only on the draws") {
    auto a = synthetic_output();
    auto b = a;
    b.backend = Backend::Ffvb;
    b.mcmc_control.reset();
    const auto ta = summarize(a, SummaryType::Quantiles, 0);
    const auto tb = summarize(b, SummaryType::Quantiles, 0);
    CHECK(ta.values == tb.values);
    CHECK_THROWS_AS(summarize(b, SummaryType::Diagnostics, 0), UnsupportedError);
}

TEST_CASE("compare_sources probabilities are complementary") {
    const auto out = synthetic_output();
    const auto cmp = compare_sources(out, {"a", "b", "c"}, 0);
    REQUIRE(cmp.pairs.size() == 3);
    const auto rev = compare_sources(out, {"b", "a"}, 0);
    CHECK(cmp.pairs[0].probability + rev.pairs[0].probability == doctest::Approx(1.0));
    // oracle: count directly
    const auto& p = out.groups[0].p;
    const double direct = static_cast<double>((p.col(0).array() > p.col(1).array()).count()) / p.rows();
    CHECK(cmp.pairs[0].probability == direct);
    CHECK(cmp.boxes.size() == 3);
    CHECK(cmp.to_text().find("Prob ( proportion of a > proportion of b )") != std::string::npos);
    CHECK_THROWS_AS(compare_sources(out, {"a"}, 0), ValidationError);
    CHECK_THROWS_AS(compare_sources(out, {"a", "zz"}, 0), ValidationError);
}

TEST_CASE("compare_groups pairs draws by index") {
    auto out = synthetic_output();
    const auto cmp = compare_groups(out, "a", {0, 1});
    REQUIRE(cmp.pairs.size() == 1);
    CHECK(cmp.pairs[0].probability > 0.8);  // group 1 shifts source a up
    CHECK(cmp.pairs[0].probability <= 1.0);
    CHECK(cmp.labels == std::vector<std::string>{"g1", "g2"});

    // ties count as not greater
    out.groups[1].p = out.groups[0].p;
    CHECK(compare_groups(out, "a", {0, 1}).pairs[0].probability == 0.0);

    PosteriorOutput single = synthetic_output();
    single.groups.pop_back();
    CHECK_THROWS_AS(compare_groups(single, "a", {0}), ValidationError);
}

TEST_CASE("combine_sources conserves mass and is associative") {
    const auto out = synthetic_output();
    const auto ab = combine_sources(out, {"b", "c"}, "bc");
    CHECK(ab.source_names == std::vector<std::string>{"a", "bc", "d"});
    CHECK(ab.source_map[1] == std::vector<Index>{1, 2});
    CHECK(ab.is_combined());
    for (std::size_t g = 0; g < 2; ++g) {
        CHECK(((ab.groups[g].p.rowwise().sum().array() - 1.0).abs() < 1e-12).all());
        CHECK((ab.groups[g].p.col(1) - (out.groups[g].p.col(1) + out.groups[g].p.col(2))).cwiseAbs().maxCoeff() < 1e-15);
        CHECK(ab.groups[g].sigma == out.groups[g].sigma);
    }

    const auto left = combine_sources(combine_sources(out, {"a", "b"}, "ab"), {"ab", "c"}, "abc");
    const auto right = combine_sources(combine_sources(out, {"b", "c"}, "bc"), {"a", "bc"}, "abc");
    const auto flat = combine_sources(out, {"a", "b", "c"}, "abc");
    CHECK(left.source_names == flat.source_names);
    CHECK(left.source_map == flat.source_map);
    CHECK((left.groups[0].p - right.groups[0].p).cwiseAbs().maxCoeff() < 1e-15);
    CHECK((left.groups[0].p - flat.groups[0].p).cwiseAbs().maxCoeff() < 1e-15);

    // combined column sits where the earliest member was
    const auto late = combine_sources(out, {"d", "b"}, "bd");
    CHECK(late.source_names == std::vector<std::string>{"a", "bd", "c"});

    CHECK_THROWS_AS(combine_sources(out, {"a"}, "x"), ValidationError);
    CHECK_THROWS_AS(combine_sources(out, {"a", "a"}, "x"), ValidationError);
    CHECK_THROWS_AS(combine_sources(out, {"a", "b", "c", "d"}, "all"), ValidationError);
    CHECK_THROWS_AS(combine_sources(out, {"a", "b"}, "c"), ValidationError);
    CHECK_THROWS_AS(combine_sources(out, {"a", "q"}, "x"), ValidationError);
}

TEST_CASE("prior draws sit on the simplex and are shared across groups") {
    const auto out = synthetic_output();
    const auto a = prior_viz_data(out, 0, 2000, 9);
    const auto b = prior_viz_data(out, 1, 2000, 9);
    CHECK(a.prior == b.prior);
    CHECK(((a.prior.rowwise().sum().array() - 1.0).abs() < 1e-12).all());
    CHECK((a.prior.array() > 0).all());
    // default prior: exchangeable, mean 1/K
    for (Index k = 0; k < 4; ++k) CHECK(a.prior.col(k).mean() == doctest::Approx(0.25).epsilon(0.08));
    CHECK(a.prior_density.size() == 4);
    CHECK(a.to_csv().rfind("source,kind,x,density\n", 0) == 0);

    const auto combined = prior_viz_data(combine_sources(out, {"a", "b"}, "ab"), 0, 2000, 9);
    CHECK(combined.prior.cols() == 3);
    CHECK((combined.prior.col(0) - (a.prior.col(0) + a.prior.col(1))).cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("posterior predictive intervals") {
    const SimmInput in = simm::testing::simple_input();
    McmcControl c;
    c.iterations = 3000;
    c.burn_in = 500;
    c.thin = 5;
    const auto out = run_mcmc(in, Priors::defaults(3), c);
    const auto check = posterior_predictive(out, in, 0, 0.5);
    CHECK(check.rows.size() == 10);
    CHECK(check.replicates.rows() == out.groups[0].n_draws());
    CHECK(check.replicates.cols() == 10);
    for (const auto& r : check.rows) CHECK(r.lower < r.upper);
    CHECK(check.coverage >= 0.0);
    CHECK(check.coverage <= 1.0);
    const auto wide = posterior_predictive(out, in, 0, 0.99);
    CHECK(wide.coverage >= check.coverage);
    CHECK(check.to_csv(in.tracer_names()).rfind("observation,tracer,observed,lower,upper,inside\n", 0) == 0);

    CHECK_THROWS_AS(posterior_predictive(out, in, 0, 1.0), ValidationError);
    CHECK_THROWS_AS(posterior_predictive(combine_sources(out, {"A", "B"}, "AB"), in, 0), UnsupportedError);
}

TEST_CASE("plot datasets") {
    const auto out = synthetic_output();
    const auto box = boxplot_data(out, 1);
    CHECK(box.labels.size() == 4);
    CHECK(box.boxes[0].median == doctest::Approx(stats::quantile(out.groups[1].p.col(0), 0.5)));
    CHECK(box.to_csv().rfind("label,lower_whisker", 0) == 0);

    const auto dens = density_data(out, 0);
    CHECK(dens.curves.size() == 4);

    const auto mat = matrix_plot_data(out, 0, 20, 25);
    CHECK(mat.histograms.size() == 4);
    CHECK(mat.contours.size() == 6);
    CHECK(mat.contours[0].z.rows() == 25);
    CHECK(mat.correlations(0, 1) == doctest::Approx(stats::pearson(out.groups[0].p.col(0), out.groups[0].p.col(1))));
    const std::string csv = mat.to_csv();
    CHECK(csv.find("correlation,b,a") != std::string::npos);

    const auto cmp = boxplot_data(compare_groups(out, "a", {0, 1}), "a by group");
    CHECK(cmp.labels == std::vector<std::string>{"g1", "g2"});
}
