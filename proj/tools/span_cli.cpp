// span: spectral augmentation pipeline CLI.
// generate -> scheme -> sample -> spectrum/casestudy/preanalysis -> train ->
// probe -> verify. Every run stamps a manifest into --out-dir.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <Eigen/Core>
#include <json.hpp>

#include "specaug/augment.hpp"
#include "specaug/baselines.hpp"
#include "specaug/csv.hpp"
#include "specaug/gcl.hpp"
#include "specaug/graph.hpp"
#include "specaug/oracle.hpp"
#include "specaug/spectral.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace specaug;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string read_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot read " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const std::vector<std::string>& argv_tail,
                    std::uint64_t seed) {
    fs::create_directories(out_dir);
    json j;
    j["command"] = command;
    j["args"] = argv_tail;
    j["seed"] = seed;
    j["version"] = kVersion;
    write_file((fs::path(out_dir) / "manifest.json").string(), j.dump(2));
}

Matrix load_features_or_degrees(const Graph& g, const std::string& path) {
    if (path.empty()) return one_hot_degree_features(g);
    Matrix x = load_csv_matrix(path);
    if (x.rows() != g.n)
        throw std::invalid_argument("feature rows != node count");
    return x;
}

SchemeMode parse_mode(const std::string& s) {
    if (s == "single") return SchemeMode::kSingle;
    if (s == "double") return SchemeMode::kDouble;
    if (s == "opposite") return SchemeMode::kOpposite;
    throw std::invalid_argument("unknown mode " + s);
}

ConvKind parse_conv(const std::string& s) {
    if (s == "gcn") return ConvKind::kGcn;
    if (s == "gin") return ConvKind::kGin;
    throw std::invalid_argument("unknown conv " + s);
}

PoolKind parse_pool(const std::string& s) {
    if (s == "mean") return PoolKind::kMean;
    if (s == "sum") return PoolKind::kSum;
    throw std::invalid_argument("unknown pool " + s);
}

int run(int argc, char** argv) {
    CLI::App app{"span: spectral topology augmentation pipeline"};
    app.require_subcommand(1);
    std::vector<std::string> argv_tail(argv + 1, argv + argc);

    // ---- gen ----
    auto* gen = app.add_subcommand("gen", "generate or import a graph");
    std::string gen_kind, gen_input, gen_out = "out";
    int gen_n = 60, gen_k = 2;
    double gen_pin = 0.5, gen_pout = 0.05, gen_radius = 0.3;
    std::uint64_t gen_seed = 0;
    gen->add_option("kind", gen_kind, "sbm | geometric | edgelist")
        ->required()
        ->check(CLI::IsMember({"sbm", "geometric", "edgelist"}));
    gen->add_option("--n", gen_n);
    gen->add_option("--k", gen_k, "SBM block count");
    gen->add_option("--p-in", gen_pin);
    gen->add_option("--p-out", gen_pout);
    gen->add_option("--radius", gen_radius);
    gen->add_option("--input", gen_input, "edge list to import");
    gen->add_option("--seed", gen_seed);
    gen->add_option("--out-dir", gen_out);

    // ---- scheme ----
    auto* sch = app.add_subcommand("scheme", "optimize a perturbation scheme");
    std::string sch_graph, sch_mode = "opposite", sch_out = "out";
    double sch_ratio = 0.05, sch_lr = 1.0, sch_noise = 1e-6;
    int sch_steps = 50, sch_kext = 0;
    std::uint64_t sch_seed = 0;
    bool sch_removal = false;
    sch->add_option("--graph", sch_graph)->required();
    sch->add_option("--mode", sch_mode)
        ->check(CLI::IsMember({"single", "double", "opposite"}));
    sch->add_option("--epsilon-ratio", sch_ratio,
                    "budget as a fraction of edges; epsilon = ratio * 2m");
    sch->add_option("--steps", sch_steps)->check(CLI::PositiveNumber);
    sch->add_option("--lr", sch_lr);
    sch->add_option("--K", sch_kext, "extreme eigenpairs per end; 0 = full");
    sch->add_option("--noise", sch_noise);
    sch->add_option("--seed", sch_seed);
    sch->add_flag("--removal-only", sch_removal);
    sch->add_option("--out-dir", sch_out);

    // ---- sample ----
    auto* smp = app.add_subcommand("sample", "draw augmented views");
    std::string smp_graph, smp_scheme, smp_out = "out";
    int smp_branch = 1, smp_count = 1;
    std::uint64_t smp_seed = 0;
    smp->add_option("--graph", smp_graph)->required();
    smp->add_option("--scheme", smp_scheme)->required();
    smp->add_option("--branch", smp_branch)->check(CLI::Range(1, 2));
    smp->add_option("--count", smp_count)->check(CLI::PositiveNumber);
    smp->add_option("--seed", smp_seed);
    smp->add_option("--out-dir", smp_out);

    // ---- spectrum ----
    auto* spe = app.add_subcommand("spectrum", "spectra and graph properties");
    std::vector<std::string> spe_graphs;
    std::string spe_out = "out";
    bool spe_compare = false, spe_props = false;
    spe->add_option("graphs", spe_graphs)->required();
    spe->add_flag("--compare", spe_compare, "spectral distance (two graphs)");
    spe->add_flag("--properties", spe_props);
    spe->add_option("--out-dir", spe_out);

    // ---- casestudy ----
    auto* cas = app.add_subcommand(
        "casestudy", "per-slot probabilities on a planted-cluster graph");
    std::string cas_out = "out";
    int cas_n = 40, cas_k = 2, cas_steps = 50;
    double cas_pin = 0.8, cas_pout = 0.1, cas_radius = -1.0, cas_ratio = 0.1;
    std::uint64_t cas_seed = 0;
    cas->add_option("--n", cas_n);
    cas->add_option("--k", cas_k);
    cas->add_option("--p-in", cas_pin);
    cas->add_option("--p-out", cas_pout);
    cas->add_option("--radius", cas_radius, "use a geometric graph instead");
    cas->add_option("--epsilon-ratio", cas_ratio);
    cas->add_option("--steps", cas_steps)->check(CLI::PositiveNumber);
    cas->add_option("--seed", cas_seed);
    cas->add_option("--out-dir", cas_out);

    // ---- preanalysis ----
    auto* pre = app.add_subcommand(
        "preanalysis", "uniform vs clustered spectral-change comparison");
    std::string pre_graph, pre_labels, pre_out = "out";
    std::vector<double> pre_sigmas = {0.1, 0.2, 0.3, 0.4, 0.5};
    int pre_samples = 100;
    std::uint64_t pre_seed = 0;
    pre->add_option("--graph", pre_graph)->required();
    pre->add_option("--labels", pre_labels)->required();
    pre->add_option("--sigmas", pre_sigmas);
    pre->add_option("--samples", pre_samples)->check(CLI::PositiveNumber);
    pre->add_option("--seed", pre_seed);
    int pre_low_k = -1;
    pre->add_option("--low-k", pre_low_k,
                    "compare only the low-k smallest eigenvalues; 0 = full "
                    "spectrum, default = cluster count");
    pre->add_option("--out-dir", pre_out);

    // ---- train ----
    auto* trn = app.add_subcommand("train", "contrastive encoder training");
    std::vector<std::string> trn_graphs, trn_schemes, trn_features;
    std::string trn_conv = "gcn", trn_pool = "mean", trn_resume,
                trn_out = "out";
    TrainConfig tcfg;
    trn->add_option("--graph", trn_graphs)->required();
    trn->add_option("--scheme", trn_schemes)->required();
    trn->add_option("--features", trn_features,
                    "feature CSV per graph; default one-hot degrees");
    trn->add_option("--conv", trn_conv)->check(CLI::IsMember({"gcn", "gin"}));
    trn->add_option("--pool", trn_pool)->check(CLI::IsMember({"mean", "sum"}));
    trn->add_option("--epochs", tcfg.epochs)->check(CLI::PositiveNumber);
    trn->add_option("--lr", tcfg.lr);
    trn->add_option("--hidden", tcfg.hidden_dim)->check(CLI::PositiveNumber);
    trn->add_option("--layers", tcfg.layers)->check(CLI::PositiveNumber);
    trn->add_option("--sigma-f", tcfg.feature_mask_ratio);
    trn->add_option("--batch", tcfg.batch_size);
    trn->add_option("--seed", tcfg.seed);
    trn->add_flag("--adam", tcfg.use_adam);
    trn->add_option("--resume", trn_resume, "checkpoint to continue from");
    trn->add_option("--start-epoch", tcfg.start_epoch);
    trn->add_option("--out-dir", trn_out);

    // ---- probe ----
    auto* prb = app.add_subcommand("probe", "linear probe on frozen reps");
    std::string prb_ckpt, prb_graph, prb_labels, prb_features,
        prb_out = "out";
    std::uint64_t prb_seed = 0;
    bool prb_raw = false, prb_save_reps = false;
    prb->add_option("--checkpoint", prb_ckpt);
    prb->add_option("--graph", prb_graph)->required();
    prb->add_option("--labels", prb_labels)->required();
    prb->add_option("--features", prb_features);
    prb->add_flag("--raw", prb_raw, "probe the features directly");
    prb->add_flag("--save-reps", prb_save_reps, "dump probed reps as CSV");
    prb->add_option("--seed", prb_seed);
    prb->add_option("--out-dir", prb_out);

    // ---- verify ----
    auto* ver = app.add_subcommand("verify", "numerical oracle suites");
    std::string ver_suite = "all", ver_out;
    std::uint64_t ver_seed = 0;
    int ver_instances = 100;
    ver->add_option("--suite", ver_suite)
        ->check(CLI::IsMember({"grad", "proj", "eigchange", "gcl", "all"}));
    ver->add_option("--seed", ver_seed);
    ver->add_option("--instances", ver_instances)->check(CLI::PositiveNumber);
    ver->add_option("--out-dir", ver_out);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    if (gen->parsed()) {
        Graph g;
        if (gen_kind == "sbm")
            g = generate_sbm(gen_n, gen_k, gen_pin, gen_pout, gen_seed);
        else if (gen_kind == "geometric")
            g = generate_random_geometric(gen_n, gen_radius, gen_seed);
        else
            g = load_graph(gen_input);
        write_manifest(gen_out, "gen", argv_tail, gen_seed);
        save_edge_list(g, (fs::path(gen_out) / "graph.edges").string());
        if (g.node_labels)
            save_labels_csv(*g.node_labels,
                            (fs::path(gen_out) / "labels.csv").string());
        if (g.positions)
            save_csv_matrix(*g.positions,
                            (fs::path(gen_out) / "positions.csv").string());
        std::cout << "wrote " << gen_out << "/graph.edges (n=" << g.n
                  << ", m=" << g.edge_count() << ")\n";
        return 0;
    }

    if (sch->parsed()) {
        Graph g = load_graph(sch_graph);
        SchemeConfig cfg;
        cfg.mode = parse_mode(sch_mode);
        cfg.epsilon = sch_ratio * 2.0 * g.edge_count();
        cfg.steps = sch_steps;
        cfg.lr = sch_lr;
        cfg.selection.k_extreme = sch_kext;
        if (!cfg.selection.is_full(g.n) && 2 * sch_kext >= g.n)
            std::cerr << "K >= n/2: using the full decomposition\n";
        cfg.noise_seed = sch_seed;
        cfg.init_seed = sch_seed + 1;
        cfg.noise_eps = sch_noise;
        cfg.removal_only = sch_removal;
        AugmentationScheme scheme = optimize_scheme(g, cfg);
        write_manifest(sch_out, "scheme", argv_tail, sch_seed);
        write_file((fs::path(sch_out) / "scheme.json").string(),
                   scheme_to_json(scheme, g.n));
        write_file((fs::path(sch_out) / "trajectory.csv").string(),
                   trajectory_to_csv(scheme));
        const auto& last = scheme.trajectory.back();
        std::cout << "L_GS(0)=" << g17(scheme.lgs0)
                  << " final ratio1=" << g17(last.ratio1)
                  << " ratio2=" << g17(last.ratio2) << "\n";
        return 0;
    }

    if (smp->parsed()) {
        Graph g = load_graph(smp_graph);
        AugmentationScheme scheme = scheme_from_json(read_file(smp_scheme));
        const ProbabilityMatrix& delta =
            (smp_branch == 2 && scheme.delta2) ? *scheme.delta2
                                               : scheme.delta1;
        if (smp_branch == 2 && !scheme.delta2)
            throw std::invalid_argument("scheme has no second branch");
        write_manifest(smp_out, "sample", argv_tail, smp_seed);
        for (int i = 0; i < smp_count; ++i) {
            Graph view = sample_view(g, delta, smp_seed + i);
            char name[32];
            std::snprintf(name, sizeof(name), "view_%03d.edges", i);
            save_edge_list(view, (fs::path(smp_out) / name).string());
        }
        std::cout << "wrote " << smp_count << " views to " << smp_out << "\n";
        return 0;
    }

    if (spe->parsed()) {
        std::vector<Graph> gs;
        for (const auto& p : spe_graphs) gs.push_back(load_graph(p));
        write_manifest(spe_out, "spectrum", argv_tail, 0);
        std::vector<std::vector<std::string>> rows;
        for (size_t t = 0; t < gs.size(); ++t) {
            Vector vals = eig_full(normalized_laplacian(gs[t])).values;
            for (int i = 0; i < vals.size(); ++i)
                rows.push_back({spe_graphs[t], std::to_string(i),
                                g17(vals(i))});
        }
        write_csv((fs::path(spe_out) / "spectrum.csv").string(),
                  {"graph", "index", "eigenvalue"}, rows);
        if (spe_compare) {
            if (gs.size() != 2)
                throw std::invalid_argument("--compare needs two graphs");
            write_csv((fs::path(spe_out) / "compare.csv").string(),
                      {"graph_a", "graph_b", "spectral_distance"},
                      {{spe_graphs[0], spe_graphs[1],
                        g17(spectral_distance(gs[0], gs[1]))}});
        }
        if (spe_props) {
            std::vector<std::vector<std::string>> prows;
            for (size_t t = 0; t < gs.size(); ++t) {
                int comps = connected_components_spectral(gs[t]);
                std::string dlo = "nan", dhi = "nan", dex = "nan";
                if (comps == 1) {
                    DiameterBounds b = diameter_bounds(gs[t]);
                    dlo = g17(b.lower);
                    dhi = g17(b.upper);
                    dex = std::to_string(b.exact);
                }
                prows.push_back({spe_graphs[t],
                                 g17(algebraic_connectivity(gs[t])),
                                 std::to_string(comps), dlo, dhi, dex});
            }
            write_csv((fs::path(spe_out) / "properties.csv").string(),
                      {"graph", "algebraic_connectivity", "components",
                       "diameter_lower", "diameter_upper", "diameter_exact"},
                      prows);
        }
        std::cout << "wrote spectra to " << spe_out << "\n";
        return 0;
    }

    if (cas->parsed()) {
        Graph g = (cas_radius > 0.0)
                      ? generate_random_geometric(cas_n, cas_radius, cas_seed)
                      : generate_sbm(cas_n, cas_k, cas_pin, cas_pout,
                                     cas_seed);
        std::vector<int> labels =
            g.node_labels ? *g.node_labels
                          : spectral_clustering(g, cas_k, cas_seed).labels;
        SchemeConfig cfg;
        cfg.mode = SchemeMode::kOpposite;
        cfg.epsilon = cas_ratio * 2.0 * g.edge_count();
        cfg.steps = cas_steps;
        cfg.noise_seed = cas_seed;
        cfg.init_seed = cas_seed + 1;
        AugmentationScheme scheme = optimize_scheme(g, cfg);
        write_manifest(cas_out, "casestudy", argv_tail, cas_seed);

        std::vector<std::vector<std::string>> rows;
        for (int i = 0; i < g.n; ++i)
            for (int j = i + 1; j < g.n; ++j)
                rows.push_back(
                    {std::to_string(i), std::to_string(j),
                     std::to_string(static_cast<int>(g.adjacency(i, j))),
                     std::to_string(labels[i] != labels[j] ? 1 : 0),
                     g17(scheme.delta1.delta(i, j)),
                     g17(scheme.delta2 ? scheme.delta2->delta(i, j) : 0.0)});
        write_csv((fs::path(cas_out) / "slots.csv").string(),
                  {"i", "j", "is_edge", "is_inter", "delta1", "delta2"},
                  rows);

        InterIntraSummary s1 =
            inter_intra_probability_summary(g, scheme.delta1, labels);
        InterIntraSummary s2 = inter_intra_probability_summary(
            g, scheme.delta2 ? *scheme.delta2 : scheme.delta1, labels);
        json j;
        j["delta1"] = {{"mean_inter_remove", s1.mean_inter_remove},
                       {"mean_intra_remove", s1.mean_intra_remove},
                       {"mean_inter_add", s1.mean_inter_add},
                       {"mean_intra_add", s1.mean_intra_add}};
        j["delta2"] = {{"mean_inter_remove", s2.mean_inter_remove},
                       {"mean_intra_remove", s2.mean_intra_remove},
                       {"mean_inter_add", s2.mean_inter_add},
                       {"mean_intra_add", s2.mean_intra_add}};
        write_file((fs::path(cas_out) / "summary.json").string(), j.dump(2));
        std::cout << "delta1 inter/intra removal: "
                  << g17(s1.mean_inter_remove) << " / "
                  << g17(s1.mean_intra_remove) << "\n";
        return 0;
    }

    if (pre->parsed()) {
        Graph g = load_graph(pre_graph);
        std::vector<int> labels = load_labels_csv(pre_labels);
        if (static_cast<int>(labels.size()) != g.n)
            throw std::invalid_argument("label count != node count");
        ClusterAssignment clusters;
        clusters.labels = labels;
        clusters.k = *std::max_element(labels.begin(), labels.end()) + 1;
        write_manifest(pre_out, "preanalysis", argv_tail, pre_seed);
        // cluster-structure changes live in the low end of the spectrum
        int low_k = pre_low_k >= 0 ? pre_low_k : clusters.k;
        std::vector<std::vector<std::string>> rows;
        for (double sigma : pre_sigmas) {
            std::vector<std::pair<std::string, ProbabilityMatrix>> schemes;
            schemes.emplace_back("uniform", uniform_scheme(g, sigma));
            schemes.emplace_back("clustered",
                                 clustered_scheme(g, sigma, clusters));
            for (const auto& row : compare_spectral_change(
                     g, schemes, sigma, pre_samples, pre_seed, low_k))
                rows.push_back({row.scheme, g17(row.sigma),
                                g17(row.mean_distance), g17(row.std_dev),
                                std::to_string(row.samples)});
        }
        write_csv((fs::path(pre_out) / "preanalysis.csv").string(),
                  {"scheme", "sigma", "mean_distance", "std_dev", "samples"},
                  rows);
        std::cout << "wrote " << pre_out << "/preanalysis.csv\n";
        return 0;
    }

    if (trn->parsed()) {
        if (trn_schemes.size() != 1 && trn_schemes.size() != trn_graphs.size())
            throw std::invalid_argument(
                "give one scheme or one per graph");
        std::vector<Graph> graphs;
        std::vector<AugmentationScheme> schemes;
        for (size_t i = 0; i < trn_graphs.size(); ++i) {
            Graph g = load_graph(trn_graphs[i]);
            std::string fpath =
                i < trn_features.size() ? trn_features[i] : std::string();
            g.features = load_features_or_degrees(g, fpath);
            graphs.push_back(std::move(g));
            schemes.push_back(scheme_from_json(read_file(
                trn_schemes.size() == 1 ? trn_schemes[0] : trn_schemes[i])));
        }
        tcfg.conv_kind = parse_conv(trn_conv);
        tcfg.pool = parse_pool(trn_pool);
        EncoderState renc;
        ReadoutState rrd;
        bool resuming = !trn_resume.empty();
        if (resuming) checkpoint_from_json(read_file(trn_resume), &renc, &rrd);
        TrainResult result =
            train(graphs, schemes, tcfg, resuming ? &renc : nullptr,
                  resuming ? &rrd : nullptr);
        write_manifest(trn_out, "train", argv_tail, tcfg.seed);
        write_file((fs::path(trn_out) / "checkpoint.json").string(),
                   checkpoint_to_json(result.encoder, result.readout_state));
        std::vector<std::vector<std::string>> rows;
        for (size_t e = 0; e < result.loss_curve.size(); ++e)
            rows.push_back(
                {std::to_string(tcfg.start_epoch + static_cast<int>(e)),
                 g17(result.loss_curve[e])});
        write_csv((fs::path(trn_out) / "loss.csv").string(),
                  {"epoch", "loss"}, rows);
        std::cout << "final loss " << g17(result.loss_curve.back()) << "\n";
        return 0;
    }

    if (prb->parsed()) {
        Graph g = load_graph(prb_graph);
        std::vector<int> labels = load_labels_csv(prb_labels);
        Matrix x = load_features_or_degrees(g, prb_features);
        Matrix reps;
        if (prb_raw) {
            reps = x;
        } else {
            if (prb_ckpt.empty())
                throw std::invalid_argument("--checkpoint or --raw required");
            EncoderState enc;
            ReadoutState rd;
            checkpoint_from_json(read_file(prb_ckpt), &enc, &rd);
            reps = encoder_forward(g, x, enc);
        }
        ProbeResult res = linear_probe(reps, labels, prb_seed);
        write_manifest(prb_out, "probe", argv_tail, prb_seed);
        if (prb_save_reps)
            save_csv_matrix(reps, (fs::path(prb_out) / "reps.csv").string());
        json j;
        j["accuracy"] = res.metric;
        j["l2_weight"] = res.selected_l2;
        write_file((fs::path(prb_out) / "metrics.json").string(), j.dump(2));
        std::cout << j.dump() << "\n";
        return 0;
    }

    if (ver->parsed()) {
        OracleReport report = run_oracle_suite(ver_suite, ver_seed,
                                               ver_instances);
        std::string text = report.to_json();
        if (!ver_out.empty()) {
            write_manifest(ver_out, "verify", argv_tail, ver_seed);
            write_file((fs::path(ver_out) / "report.json").string(), text);
        }
        std::cout << text << "\n";
        return report.all_passed() ? 0 : 1;
    }

    return 2;
}

}  // namespace

int main(int argc, char** argv) {
    if (const char* t = std::getenv("SPAN_THREADS"))
        Eigen::setNbThreads(std::max(1, std::atoi(t)));
    try {
        return run(argc, argv);
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
}
