#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <optional>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "engine/config.hpp"
#include "engine/csv.hpp"
#include "engine/dataset.hpp"
#include "engine/errors.hpp"
#include "engine/kernels.hpp"

namespace fs = std::filesystem;
using engine::config::EngineConfig;

namespace {

std::string opt_str(const std::optional<double>& v) {
    return v ? engine::io::format_double(*v) : "";
}

EngineConfig load_config(const std::string& config_path, std::optional<std::uint64_t> seed,
                         std::optional<int> n_ph, const std::string& type) {
    EngineConfig cfg = config_path.empty() ? EngineConfig::defaults() : EngineConfig::from_file(config_path);
    if (!type.empty()) {
        if (type == "network") {
            cfg.fraud = engine::config::default_fraud_spec(true);
        } else if (type == "nonnetwork") {
            cfg.fraud = engine::config::default_fraud_spec(false);
        } else {
            throw engine::ConfigError("unknown dataset type '" + type + "' (expected network or nonnetwork)");
        }
    }
    if (seed) cfg.master_seed = *seed;
    if (n_ph) cfg.portfolio.n_ph = *n_ph;
    return cfg;
}

void print_manifest_summary(const engine::dataset::Manifest& m, std::ostream& out) {
    out << "claims: " << m.n_claims << "  contracts: " << m.n_contracts
        << "  policyholders: " << m.n_policyholders << "\n";
    out << "achieved imbalance: " << m.achieved_imbalance
        << " (intercept " << m.calibrated_intercept << ", "
        << m.calibration_evaluations << " calibration runs)\n";
    out << "labels: fraud " << m.n_fraud << ", non-fraud " << m.n_nonfraud << "\n";
    out << "expert: fraudulent " << m.n_expert_fraud << ", non-fraudulent " << m.n_expert_nonfraud
        << ", uninvestigated " << m.n_uninvestigated << "\n";
    out << "dyadicity: " << (m.dyadicity ? engine::io::format_double(*m.dyadicity) : "undefined")
        << "  heterophilicity: "
        << (m.heterophilicity ? engine::io::format_double(*m.heterophilicity) : "undefined") << "\n";
}

struct ReplicateOutcome {
    int replicate = 0;
    engine::dataset::Manifest manifest;
    std::vector<engine::evaluate::PerformanceReport> reports;
    engine::evaluate::LogisticFit recovery;
};

std::string pack_coefficients(const engine::evaluate::LogisticFit& fit) {
    std::string out;
    for (std::size_t i = 0; i < fit.beta.size(); ++i) {
        if (i) out += ';';
        out += fit.names[i] + ":" + engine::io::format_double(fit.beta[i]);
    }
    return out;
}

int cmd_generate(const std::string& config_path, std::optional<std::uint64_t> seed,
                 std::optional<int> n_ph, const std::string& type, const std::string& out_dir) {
    const EngineConfig cfg = load_config(config_path, seed, n_ph, type);
    const engine::dataset::DatasetBundle bundle = engine::dataset::generate(cfg);
    engine::dataset::write_bundle(bundle, out_dir);
    std::cout << "wrote dataset to " << out_dir << "\n";
    print_manifest_summary(bundle.manifest, std::cout);
    return 0;
}

int cmd_evaluate(const std::string& dataset_dir, std::vector<std::string> model_ids,
                 const std::string& response, const std::string& features_view,
                 const std::string& out_csv) {
    const engine::dataset::LoadedDataset data = engine::dataset::load_bundle(dataset_dir);

    engine::network::BiRankOptions birank;
    bool expert_view = false;
    const fs::path cfg_path = fs::path(dataset_dir) / "config.toml";
    if (fs::exists(cfg_path)) {
        const EngineConfig cfg = EngineConfig::from_file(cfg_path);
        birank = cfg.labeling.birank;
        expert_view = cfg.evaluation_features_expert_view;
    }
    if (features_view == "expert") expert_view = true;
    if (features_view == "ground_truth") expert_view = false;

    const bool ground_truth_response = response == "ground_truth";
    if (!ground_truth_response && response != "expert") {
        throw engine::ConfigError("response must be expert or ground_truth");
    }

    if (model_ids.empty()) model_ids = {"model1", "model2"};
    std::vector<engine::dataset::ModelDefinition> models;
    for (const auto& id : model_ids) models.push_back(engine::dataset::model_by_id(id));

    const auto features = engine::dataset::featurize_dataset(data.claims, data.graph, birank, expert_view);
    const auto columns = engine::dataset::analysis_columns(data.claims, features);
    const auto reports = engine::dataset::run_experiment(columns, models, ground_truth_response);
    const auto homophily = engine::dataset::dataset_homophily(data.claims, data.graph);
    const double imbalance =
        static_cast<double>(std::count_if(data.claims.begin(), data.claims.end(),
                                          [](const auto& r) { return r.fraud; })) /
        static_cast<double>(data.claims.size());

    const std::vector<std::string> header = {"model",   "auc_in",  "auc_out", "tdl_in",
                                             "tdl_out", "n_in",    "n_out",   "imbalance",
                                             "dyadicity", "heterophilicity", "coefficients"};
    std::optional<engine::io::CsvWriter> writer;
    if (!out_csv.empty()) {
        writer.emplace(out_csv);
        writer->write_row(header);
    }
    for (std::size_t i = 0; i < header.size(); ++i) std::cout << (i ? "," : "") << header[i];
    std::cout << "\n";
    for (const auto& r : reports) {
        const std::vector<std::string> row = {
            r.model_id,         opt_str(r.auc_in),     opt_str(r.auc_out),
            opt_str(r.tdl_in),  opt_str(r.tdl_out),    std::to_string(r.n_in),
            std::to_string(r.n_out), engine::io::format_double(imbalance),
            opt_str(homophily.dyadicity), opt_str(homophily.heterophilicity),
            pack_coefficients(r.fit)};
        for (std::size_t i = 0; i < row.size(); ++i) std::cout << (i ? "," : "") << engine::io::csv_escape(row[i]);
        std::cout << "\n";
        if (writer) writer->write_row(row);
    }
    if (writer) writer->close();
    return 0;
}

int cmd_replicate(const std::string& config_path, int n, std::uint64_t seed_base,
                  std::optional<int> n_ph, const std::string& type, const std::string& out_dir,
                  bool run_models, bool keep_bundles) {
    const EngineConfig base = load_config(config_path, std::nullopt, n_ph, type);
    fs::create_directories(out_dir);

    const int threads = std::min(engine::config::engine_threads(), n);
    std::atomic<int> next{0};
    std::mutex mu;
    std::vector<ReplicateOutcome> outcomes(static_cast<std::size_t>(n));
    std::vector<std::string> failures;

    auto worker = [&]() {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                EngineConfig cfg = base;
                cfg.master_seed = seed_base + static_cast<std::uint64_t>(i);
                engine::dataset::DatasetBundle bundle = engine::dataset::generate(cfg);

                ReplicateOutcome outcome;
                outcome.replicate = i;
                outcome.manifest = bundle.manifest;
                if (run_models) {
                    const auto columns = engine::dataset::analysis_columns(bundle.claims, bundle.features);
                    outcome.reports = engine::dataset::run_experiment(
                        columns, {engine::dataset::model1(), engine::dataset::model2()}, false);
                    outcome.recovery = engine::dataset::recover_coefficients(columns);
                }
                if (keep_bundles) {
                    char name[32];
                    std::snprintf(name, sizeof(name), "replicate_%04d", i);
                    const fs::path final_dir = fs::path(out_dir) / name;
                    const fs::path tmp_dir = fs::path(out_dir) / (std::string(".tmp_") + name);
                    fs::remove_all(tmp_dir);
                    engine::dataset::write_bundle(bundle, tmp_dir);
                    fs::remove_all(final_dir);
                    fs::rename(tmp_dir, final_dir);
                }
                std::lock_guard<std::mutex> lock(mu);
                outcomes[static_cast<std::size_t>(i)] = std::move(outcome);
                std::cerr << "replicate " << i << " done (imbalance "
                          << outcomes[static_cast<std::size_t>(i)].manifest.achieved_imbalance << ")\n";
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(mu);
                failures.push_back("replicate " + std::to_string(i) + ": " + e.what());
            }
        }
    };
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();

    if (!failures.empty()) {
        for (const auto& f : failures) std::cerr << f << "\n";
        return 1;
    }

    // all replicates must come from the same configuration
    for (const auto& o : outcomes) {
        if (o.manifest.config_hash != outcomes.front().manifest.config_hash) {
            throw engine::ConfigError("replicate aggregation refuses to mix different configurations");
        }
    }

    // Table of label frequencies: average, minimum, maximum of counts and
    // relative frequencies per label.
    {
        engine::io::CsvWriter w(fs::path(out_dir) / "aggregate.csv");
        w.write_row(std::vector<std::string>{"label_type", "label", "avg_count", "min_count", "max_count",
                                             "avg_pct", "min_pct", "max_pct"});
        auto emit = [&](const std::string& type_name, const std::string& label, auto getter) {
            double sum = 0.0, mn = 1e300, mx = -1e300;
            double psum = 0.0, pmn = 1e300, pmx = -1e300;
            for (const auto& o : outcomes) {
                const double v = static_cast<double>(getter(o.manifest));
                const double pct = 100.0 * v / static_cast<double>(o.manifest.n_claims);
                sum += v;
                mn = std::min(mn, v);
                mx = std::max(mx, v);
                psum += pct;
                pmn = std::min(pmn, pct);
                pmx = std::max(pmx, pct);
            }
            const double count = static_cast<double>(outcomes.size());
            w.write_row(std::vector<std::string>{
                type_name, label, engine::io::format_double(sum / count), engine::io::format_double(mn),
                engine::io::format_double(mx), engine::io::format_double(psum / count),
                engine::io::format_double(pmn), engine::io::format_double(pmx)});
        };
        emit("Y", "fraudulent", [](const auto& m) { return m.n_fraud; });
        emit("Y", "non-fraudulent", [](const auto& m) { return m.n_nonfraud; });
        emit("Yexpert", "fraudulent", [](const auto& m) { return m.n_expert_fraud; });
        emit("Yexpert", "non-fraudulent", [](const auto& m) { return m.n_expert_nonfraud; });
        emit("Yexpert", "uninvestigated", [](const auto& m) { return m.n_uninvestigated; });
        w.close();
    }

    if (run_models) {
        engine::io::CsvWriter w(fs::path(out_dir) / "experiments.csv");
        w.write_row(std::vector<std::string>{"replicate", "model", "auc_in", "auc_out", "tdl_in", "tdl_out",
                                             "imbalance", "dyadicity", "heterophilicity", "coefficients"});
        for (const auto& o : outcomes) {
            for (const auto& r : o.reports) {
                w.write_row(std::vector<std::string>{
                    std::to_string(o.replicate), r.model_id, opt_str(r.auc_in), opt_str(r.auc_out),
                    opt_str(r.tdl_in), opt_str(r.tdl_out),
                    engine::io::format_double(o.manifest.achieved_imbalance),
                    opt_str(o.manifest.dyadicity), opt_str(o.manifest.heterophilicity),
                    pack_coefficients(r.fit)});
            }
            w.write_row(std::vector<std::string>{
                std::to_string(o.replicate), "dgm", "", "", "", "",
                engine::io::format_double(o.manifest.achieved_imbalance), opt_str(o.manifest.dyadicity),
                opt_str(o.manifest.heterophilicity), pack_coefficients(o.recovery)});
        }
        w.close();
    }

    std::cout << "replicates: " << n << " -> " << out_dir << "\n";
    double avg = 0.0;
    for (const auto& o : outcomes) avg += o.manifest.achieved_imbalance;
    std::cout << "mean achieved imbalance: " << avg / n << "\n";
    return 0;
}

int cmd_diagnose(const std::string& dataset_dir) {
    const engine::dataset::LoadedDataset data = engine::dataset::load_bundle(dataset_dir);
    const auto homophily = engine::dataset::dataset_homophily(data.claims, data.graph);

    engine::dataset::Manifest recomputed = data.manifest;
    recomputed.n_fraud = recomputed.n_nonfraud = 0;
    recomputed.n_expert_fraud = recomputed.n_expert_nonfraud = recomputed.n_uninvestigated = 0;
    for (const auto& r : data.claims) {
        if (r.fraud) ++recomputed.n_fraud;
        else ++recomputed.n_nonfraud;
        switch (r.expert) {
        case engine::investigate::ExpertLabel::fraudulent: ++recomputed.n_expert_fraud; break;
        case engine::investigate::ExpertLabel::non_fraudulent: ++recomputed.n_expert_nonfraud; break;
        case engine::investigate::ExpertLabel::uninvestigated: ++recomputed.n_uninvestigated; break;
        }
    }
    recomputed.achieved_imbalance =
        static_cast<double>(recomputed.n_fraud) / static_cast<double>(data.claims.size());
    recomputed.dyadicity = homophily.dyadicity;
    recomputed.heterophilicity = homophily.heterophilicity;

    std::cout << "dataset: " << dataset_dir << " (" << data.claims.size() << " claims)\n";
    print_manifest_summary(recomputed, std::cout);
    const bool consistent = recomputed.n_fraud == data.manifest.n_fraud &&
                            recomputed.n_uninvestigated == data.manifest.n_uninvestigated &&
                            recomputed.achieved_imbalance == data.manifest.achieved_imbalance &&
                            recomputed.dyadicity == data.manifest.dyadicity &&
                            recomputed.heterophilicity == data.manifest.heterophilicity;
    std::cout << "manifest consistency: " << (consistent ? "ok" : "MISMATCH") << "\n";
    return consistent ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"synthetic motor-insurance fraud network data simulator"};
    app.set_version_flag("--version", std::string("fraudsim ") + engine::config::kEngineVersion);
    app.require_subcommand(1);

    std::string config_path, out_dir, dataset_dir, type, response = "expert", features_view, out_csv;
    std::optional<std::uint64_t> seed;
    std::optional<int> n_ph;
    std::vector<std::string> model_ids;
    int n_replicates = 10;
    std::uint64_t seed_base = 1;
    bool run_models = true;
    bool keep_bundles = true;

    auto* gen = app.add_subcommand("generate", "generate one synthetic dataset bundle");
    gen->add_option("--config", config_path, "config file (TOML); defaults when omitted");
    gen->add_option("--seed", seed, "master seed override");
    gen->add_option("--n-ph", n_ph, "number of policyholders override");
    gen->add_option("--type", type, "fraud model preset: network | nonnetwork");
    gen->add_option("--out", out_dir, "output directory")->required();

    auto* eva = app.add_subcommand("evaluate", "fit and score detection models on a bundle");
    eva->add_option("--dataset", dataset_dir, "dataset directory")->required();
    eva->add_option("--model", model_ids, "model ids (model1, model2, dgm); default both");
    eva->add_option("--response", response, "in-sample response: expert | ground_truth");
    eva->add_option("--features-view", features_view,
                    "label view for featurization: ground_truth | expert");
    eva->add_option("--out", out_csv, "also write the report rows to this CSV");

    auto* rep = app.add_subcommand("replicate", "generate N replicate datasets and aggregate");
    rep->add_option("--config", config_path, "config file (TOML); defaults when omitted");
    rep->add_option("--n", n_replicates, "number of replicates")->required();
    rep->add_option("--seed-base", seed_base, "seed for replicate 0; replicate i uses seed-base + i");
    rep->add_option("--n-ph", n_ph, "number of policyholders override");
    rep->add_option("--type", type, "fraud model preset: network | nonnetwork");
    rep->add_option("--out", out_dir, "output directory")->required();
    rep->add_flag("--models,!--no-models", run_models, "fit model1/model2 and recover coefficients");
    rep->add_flag("--bundles,!--no-bundles", keep_bundles, "write full bundles per replicate");

    auto* dia = app.add_subcommand("diagnose", "homophily and label summary for an existing bundle");
    dia->add_option("--dataset", dataset_dir, "dataset directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (gen->parsed()) return cmd_generate(config_path, seed, n_ph, type, out_dir);
        if (eva->parsed()) return cmd_evaluate(dataset_dir, model_ids, response, features_view, out_csv);
        if (rep->parsed())
            return cmd_replicate(config_path, n_replicates, seed_base, n_ph, type, out_dir, run_models,
                                 keep_bundles);
        if (dia->parsed()) return cmd_diagnose(dataset_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
