#include "engine/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iterator>
#include <map>

#include <json.hpp>

#include "engine/csv.hpp"
#include "engine/errors.hpp"
#include "engine/labeling.hpp"

namespace engine::dataset {

namespace {

using nlohmann::json;

// Pipeline step substreams (Fig. 2 order).
enum Step : std::uint64_t {
    kStepPortfolio = 1,
    kStepClaims = 2,
    kStepNetwork = 3,
    kStepLabels = 4,
    kStepExpert = 5,
};

template <typename F>
auto step(const char* name, F&& f) {
    try {
        return f();
    } catch (const CalibrationError&) {
        throw;
    } catch (const Error& e) {
        throw Error(std::string(name) + ": " + e.what());
    }
}

labeling::StaticDesign build_static_design(const std::vector<ClaimRow>& claims,
                                           const network::BipartiteGraph& graph,
                                           const network::ClaimProjection& projection) {
    const std::size_t n = claims.size();
    std::vector<std::pair<std::string, std::vector<double>>> raw;
    auto add = [&](const char* name, auto getter) {
        std::vector<double> col(n);
        for (std::size_t i = 0; i < n; ++i) col[i] = getter(claims[i]);
        raw.emplace_back(name, std::move(col));
    };
    add("AgePH", [](const ClaimRow& r) { return r.age_ph; });
    add("NrContractsPH", [](const ClaimRow& r) { return static_cast<double>(r.nr_contracts); });
    add("ExpPH", [](const ClaimRow& r) { return r.exp_ph; });
    add("ExpPHContracts", [](const ClaimRow& r) { return r.exp_contract; });
    add("AgeCar", [](const ClaimRow& r) { return r.age_car; });
    add("OrigValueCar", [](const ClaimRow& r) { return r.orig_value_car; });
    add("ValueCar", [](const ClaimRow& r) { return r.value_car; });
    add("BonusMalus", [](const ClaimRow& r) { return static_cast<double>(r.bonus_malus); });
    add("ClaimAmount", [](const ClaimRow& r) { return r.amount; });
    add("ClaimAge", [](const ClaimRow& r) { return static_cast<double>(r.claim_age_months); });
    add("ClaimDate", [](const ClaimRow& r) { return r.claim_date_years; });
    add("nPersons", [](const ClaimRow& r) { return static_cast<double>(r.n_persons); });
    add("Police", [](const ClaimRow& r) { return r.police ? 1.0 : 0.0; });
    {
        std::vector<double> n1(n), n2(n);
        for (std::size_t i = 0; i < n; ++i) {
            n1[i] = static_cast<double>(graph.claim_degree(static_cast<int>(i)));
            n2[i] = static_cast<double>(projection.neighbors(static_cast<int>(i)).size());
        }
        raw.emplace_back("n1.size", std::move(n1));
        raw.emplace_back("n2.size", std::move(n2));
    }
    return labeling::StaticDesign::build(raw);
}

std::string expert_str(investigate::ExpertLabel l) { return investigate::to_string(l); }

investigate::ExpertLabel expert_from(const std::string& s) {
    if (s == "uninvestigated") return investigate::ExpertLabel::uninvestigated;
    if (s == "fraudulent") return investigate::ExpertLabel::fraudulent;
    if (s == "non-fraudulent") return investigate::ExpertLabel::non_fraudulent;
    throw IoError("unknown expert label '" + s + "'");
}

} // namespace

std::vector<featurize::Label> label_view(const std::vector<ClaimRow>& claims, bool expert_view) {
    std::vector<featurize::Label> labels(claims.size(), featurize::Label::unlabeled);
    for (std::size_t i = 0; i < claims.size(); ++i) {
        if (expert_view) {
            if (claims[i].expert == investigate::ExpertLabel::fraudulent) {
                labels[i] = featurize::Label::fraud;
            } else if (claims[i].expert == investigate::ExpertLabel::non_fraudulent) {
                labels[i] = featurize::Label::nonfraud;
            }
        } else {
            labels[i] = claims[i].fraud ? featurize::Label::fraud : featurize::Label::nonfraud;
        }
    }
    return labels;
}

network::HomophilyResult dataset_homophily(const std::vector<ClaimRow>& claims,
                                           const network::BipartiteGraph& graph) {
    std::vector<std::uint8_t> fraud(claims.size(), 0);
    for (std::size_t i = 0; i < claims.size(); ++i) fraud[i] = claims[i].fraud ? 1 : 0;
    return network::homophily_metrics(graph, fraud);
}

std::vector<featurize::FeatureRow> featurize_dataset(const std::vector<ClaimRow>& claims,
                                                     const network::BipartiteGraph& graph,
                                                     const network::BiRankOptions& options,
                                                     bool expert_view) {
    const network::ClaimProjection projection(graph);
    const std::vector<featurize::Label> labels = label_view(claims, expert_view);
    std::vector<double> query(claims.size(), 0.0);
    for (std::size_t i = 0; i < claims.size(); ++i) {
        if (labels[i] == featurize::Label::fraud) query[i] = 1.0;
    }
    const network::BiRankResult scores = network::birank(graph, query, options);
    std::vector<featurize::FeatureRow> rows(claims.size());
    for (std::size_t i = 0; i < claims.size(); ++i) {
        rows[i] = featurize::features_for_claim(graph, projection, &scores, labels, static_cast<int>(i));
    }
    return rows;
}

DatasetBundle generate(const config::EngineConfig& cfg) {
    {
        const std::vector<std::string> problems = cfg.validate();
        if (!problems.empty()) {
            std::string msg = "invalid configuration:";
            for (const auto& p : problems) msg += "\n  - " + p;
            throw ConfigError(msg);
        }
    }

    const rng::RandomStream root(cfg.master_seed);

    // Steps 1-2: portfolio.
    portfolio::Portfolio folio = step("step 1-2 (portfolio)", [&] {
        auto stream = root.child(rng::Scope::generic, kStepPortfolio);
        return portfolio::generate_portfolio(cfg.portfolio, stream);
    });

    // Steps 3-4: claim counts, costs and attributes.
    std::vector<claims::ClaimRecord> claim_records = step("step 3-4 (claims)", [&] {
        auto stream = root.child(rng::Scope::generic, kStepClaims);
        return claims::simulate_claims(folio, cfg.claims, stream);
    });

    std::vector<ClaimRow> rows(claim_records.size());
    for (std::size_t i = 0; i < claim_records.size(); ++i) {
        const claims::ClaimRecord& rec = claim_records[i];
        const portfolio::Contract& c = folio.contracts[static_cast<std::size_t>(rec.contract_row)];
        const portfolio::Policyholder& ph = folio.policyholders[static_cast<std::size_t>(c.ph_id - 1)];
        ClaimRow& row = rows[i];
        row.claim_id = static_cast<int>(i) + 1;
        row.ph_id = ph.id;
        row.contract_index = c.index;
        row.k = rec.k;
        row.age_ph = ph.age;
        row.gender = portfolio::to_string(ph.gender);
        row.exp_ph = ph.exposure_years;
        row.rate_ncontracts = ph.contract_rate;
        row.nr_contracts = ph.n_contracts;
        row.exp_contract = c.exposure_years;
        row.age_car = c.age_car;
        row.orig_value_car = c.orig_value_car;
        row.value_car = c.value_car;
        row.coverage = portfolio::to_string(c.coverage);
        row.fuel = c.fuel == portfolio::Fuel::diesel ? "diesel" : "gasoline/LPG/other";
        row.bonus_malus = c.bonus_malus;
        row.amount = rec.amount;
        row.claim_age_months = rec.claim_age_months;
        row.claim_date_years = rec.claim_date_years;
        row.police = rec.police;
        row.n_persons = rec.n_persons;
    }

    // Step 5a: the claim-party network.
    network::BipartiteGraph graph = step("step 5a (network)", [&] {
        std::vector<int> ph_ids(rows.size());
        std::vector<double> amounts(rows.size());
        std::vector<int> persons(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            ph_ids[i] = rows[i].ph_id;
            amounts[i] = rows[i].amount;
            persons[i] = rows[i].n_persons;
        }
        auto stream = root.child(rng::Scope::generic, kStepNetwork);
        return network::assign_parties(ph_ids, amounts, persons, cfg.resolved_pools(), stream);
    });

    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (const std::int32_t p : graph.claim_parties(static_cast<int>(i))) {
            const network::Party& party = graph.party(p);
            switch (party.kind) {
            case network::PartyKind::garage: rows[i].garage = party.label; break;
            case network::PartyKind::broker: rows[i].broker = party.label; break;
            case network::PartyKind::expert: rows[i].expert_party = party.label; break;
            default: break;
            }
        }
    }

    // Step 5b: ground-truth labels with imbalance calibration.
    const network::ClaimProjection projection(graph);
    labeling::CalibrationResult calibration = step("step 5b (labels)", [&] {
        const labeling::StaticDesign statics = build_static_design(rows, graph, projection);
        auto stream = root.child(rng::Scope::generic, kStepLabels);
        return labeling::calibrate_intercept(graph, projection, statics, cfg.fraud, cfg.labeling,
                                             cfg.imbalance, stream);
    });
    for (std::size_t i = 0; i < rows.size(); ++i) {
        rows[i].fraud = calibration.run.labels[i] == featurize::Label::fraud;
    }

    // Step 6: business rules and expert judgement.
    step("step 6 (investigation)", [&] {
        auto stream = root.child(rng::Scope::generic, kStepExpert);
        std::size_t begin = 0;
        while (begin < rows.size()) {
            std::size_t end = begin + 1;
            while (end < rows.size() && rows[end].ph_id == rows[begin].ph_id &&
                   rows[end].contract_index == rows[begin].contract_index) {
                ++end;
            }
            std::vector<double> amounts, dates;
            for (std::size_t i = begin; i < end; ++i) {
                amounts.push_back(rows[i].amount);
                dates.push_back(rows[i].claim_date_years);
            }
            const double value = cfg.rules.value_basis == investigate::BusinessRules::ValueBasis::current
                                     ? rows[begin].value_car
                                     : rows[begin].orig_value_car;
            const std::vector<bool> flags = investigate::flag_suspicious(amounts, dates, value, cfg.rules);
            for (std::size_t i = begin; i < end; ++i) {
                auto sub = stream.child(rng::Scope::expert_draw, static_cast<std::uint64_t>(rows[i].claim_id));
                rows[i].expert = investigate::expert_judgement(rows[i].fraud, flags[i - begin], cfg.rules, sub);
            }
            begin = end;
        }
        return 0;
    });

    // Step 7: final featurization and the merged bundle.
    std::vector<featurize::FeatureRow> features = step("step 7 (featurization)", [&] {
        return featurize_dataset(rows, graph, cfg.labeling.birank, cfg.evaluation_features_expert_view);
    });

    Manifest manifest;
    manifest.master_seed = cfg.master_seed;
    manifest.config_hash = cfg.content_hash();
    manifest.n_policyholders = folio.policyholders.size();
    manifest.n_contracts = folio.contracts.size();
    manifest.n_claims = rows.size();
    manifest.achieved_imbalance = calibration.achieved_imbalance;
    manifest.calibrated_intercept = calibration.intercept;
    manifest.labeling_iterations = calibration.run.iterations;
    manifest.calibration_evaluations = calibration.evaluations;
    const network::HomophilyResult homophily = dataset_homophily(rows, graph);
    manifest.dyadicity = homophily.dyadicity;
    manifest.heterophilicity = homophily.heterophilicity;
    for (const ClaimRow& row : rows) {
        if (row.fraud) ++manifest.n_fraud;
        else ++manifest.n_nonfraud;
        switch (row.expert) {
        case investigate::ExpertLabel::fraudulent: ++manifest.n_expert_fraud; break;
        case investigate::ExpertLabel::non_fraudulent: ++manifest.n_expert_nonfraud; break;
        case investigate::ExpertLabel::uninvestigated: ++manifest.n_uninvestigated; break;
        }
    }

    return DatasetBundle{cfg, std::move(folio), std::move(rows), std::move(graph), std::move(features),
                         std::move(manifest)};
}

void write_bundle(const DatasetBundle& bundle, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);

    {
        io::CsvWriter w(dir / "portfolio.csv");
        const std::vector<std::string> header = {
            "IDPH", "AgePH", "GenderPH", "ExpPH", "RateNrContracts", "NrContractsPH",
            "ContractID", "ExpPHContracts", "AgeCar", "OrigValueCar", "ValueCar",
            "Coverage", "Fuel", "BonusMalus"};
        w.write_row(header);
        for (const portfolio::Contract& c : bundle.portfolio.contracts) {
            const portfolio::Policyholder& ph =
                bundle.portfolio.policyholders[static_cast<std::size_t>(c.ph_id - 1)];
            const std::vector<std::string> row = {
                std::to_string(ph.id),
                io::format_double(ph.age),
                portfolio::to_string(ph.gender),
                io::format_double(ph.exposure_years),
                io::format_double(ph.contract_rate),
                std::to_string(ph.n_contracts),
                std::to_string(c.index),
                io::format_double(c.exposure_years),
                io::format_double(c.age_car),
                io::format_double(c.orig_value_car),
                io::format_double(c.value_car),
                portfolio::to_string(c.coverage),
                c.fuel == portfolio::Fuel::diesel ? "diesel" : "gasoline/LPG/other",
                std::to_string(c.bonus_malus)};
            w.write_row(row);
        }
        w.close();
    }

    {
        io::CsvWriter w(dir / "claims.csv");
        const std::vector<std::string> header = {
            "ClaimID", "IDPH", "ContractID", "ClaimIndex", "AgePH", "GenderPH", "ExpPH",
            "NrContractsPH", "ExpPHContracts", "AgeCar", "OrigValueCar", "ValueCar", "Coverage",
            "Fuel", "BonusMalus", "ClaimAmount", "ClaimAge", "ClaimDate", "Police", "nPersons",
            "Garage", "Broker", "Expert", "Y", "Yexpert"};
        w.write_row(header);
        for (const ClaimRow& r : bundle.claims) {
            const std::vector<std::string> row = {
                std::to_string(r.claim_id),
                std::to_string(r.ph_id),
                std::to_string(r.contract_index),
                std::to_string(r.k),
                io::format_double(r.age_ph),
                r.gender,
                io::format_double(r.exp_ph),
                std::to_string(r.nr_contracts),
                io::format_double(r.exp_contract),
                io::format_double(r.age_car),
                io::format_double(r.orig_value_car),
                io::format_double(r.value_car),
                r.coverage,
                r.fuel,
                std::to_string(r.bonus_malus),
                io::format_double(r.amount),
                std::to_string(r.claim_age_months),
                io::format_double(r.claim_date_years),
                r.police ? "1" : "0",
                std::to_string(r.n_persons),
                std::to_string(r.garage),
                std::to_string(r.broker),
                std::to_string(r.expert_party),
                r.fraud ? "1" : "0",
                expert_str(r.expert)};
            w.write_row(row);
        }
        w.close();
    }

    {
        io::CsvWriter w(dir / "edges.csv");
        const std::vector<std::string> header = {"ClaimID", "PartyID", "PartyKind", "Weight"};
        w.write_row(header);
        for (int c = 0; c < bundle.graph.n_claims(); ++c) {
            const auto parties = bundle.graph.claim_parties(c);
            for (std::size_t k = 0; k < parties.size(); ++k) {
                const network::Party& p = bundle.graph.party(parties[k]);
                const std::vector<std::string> row = {
                    std::to_string(c + 1),
                    std::to_string(p.label),
                    network::to_string(p.kind),
                    io::format_double(bundle.graph.claim_party_weight(c, k))};
                w.write_row(row);
            }
        }
        w.close();
    }

    {
        io::CsvWriter w(dir / "features.csv");
        std::vector<std::string> header = {"ClaimID"};
        header.insert(header.end(), featurize::kFeatureNames.begin(), featurize::kFeatureNames.end());
        w.write_row(header);
        for (std::size_t i = 0; i < bundle.features.size(); ++i) {
            const featurize::FeatureRow& f = bundle.features[i];
            const std::vector<std::string> row = {
                std::to_string(i + 1),
                io::format_double(f.scores0),
                io::format_double(f.n1_q1),
                io::format_double(f.n1_med),
                io::format_double(f.n1_midmean),
                io::format_double(f.n2_q1),
                io::format_double(f.n2_med),
                io::format_double(f.n2_midmean),
                std::to_string(f.n1_size),
                std::to_string(f.n2_size),
                io::format_double(f.n2_ratio_fraud),
                io::format_double(f.n2_ratio_nonfraud),
                f.n2_bin_fraud ? "1" : "0"};
            w.write_row(row);
        }
        w.close();
    }

    {
        const Manifest& m = bundle.manifest;
        json j;
        j["engine_version"] = m.engine_version;
        j["master_seed"] = m.master_seed;
        j["config_hash"] = m.config_hash;
        j["n_policyholders"] = m.n_policyholders;
        j["n_contracts"] = m.n_contracts;
        j["n_claims"] = m.n_claims;
        j["achieved_imbalance"] = m.achieved_imbalance;
        j["calibrated_intercept"] = m.calibrated_intercept;
        j["labeling_iterations"] = m.labeling_iterations;
        j["calibration_evaluations"] = m.calibration_evaluations;
        if (m.dyadicity) j["dyadicity"] = *m.dyadicity;
        if (m.heterophilicity) j["heterophilicity"] = *m.heterophilicity;
        j["labels"] = {{"fraud", m.n_fraud}, {"nonfraud", m.n_nonfraud}};
        j["expert_labels"] = {{"fraudulent", m.n_expert_fraud},
                              {"non_fraudulent", m.n_expert_nonfraud},
                              {"uninvestigated", m.n_uninvestigated}};
        std::ofstream out(dir / "manifest.json", std::ios::binary);
        if (!out) throw IoError("cannot write manifest.json");
        out << j.dump(2) << "\n";
    }

    // config snapshot for reproducibility
    {
        std::ofstream out(dir / "config.toml", std::ios::binary);
        if (!out) throw IoError("cannot write config.toml");
        out << bundle.config.serialize();
    }
}

Manifest read_manifest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path.string() + "'");
    json j;
    in >> j;
    Manifest m;
    m.engine_version = j.at("engine_version").get<std::string>();
    m.master_seed = j.at("master_seed").get<std::uint64_t>();
    m.config_hash = j.at("config_hash").get<std::string>();
    m.n_policyholders = j.at("n_policyholders").get<std::size_t>();
    m.n_contracts = j.at("n_contracts").get<std::size_t>();
    m.n_claims = j.at("n_claims").get<std::size_t>();
    m.achieved_imbalance = j.at("achieved_imbalance").get<double>();
    m.calibrated_intercept = j.at("calibrated_intercept").get<double>();
    m.labeling_iterations = j.at("labeling_iterations").get<int>();
    m.calibration_evaluations = j.at("calibration_evaluations").get<int>();
    if (j.contains("dyadicity")) m.dyadicity = j.at("dyadicity").get<double>();
    if (j.contains("heterophilicity")) m.heterophilicity = j.at("heterophilicity").get<double>();
    m.n_fraud = j.at("labels").at("fraud").get<std::size_t>();
    m.n_nonfraud = j.at("labels").at("nonfraud").get<std::size_t>();
    m.n_expert_fraud = j.at("expert_labels").at("fraudulent").get<std::size_t>();
    m.n_expert_nonfraud = j.at("expert_labels").at("non_fraudulent").get<std::size_t>();
    m.n_uninvestigated = j.at("expert_labels").at("uninvestigated").get<std::size_t>();
    return m;
}

LoadedDataset load_bundle(const std::filesystem::path& dir) {
    const io::CsvTable claims = io::read_csv(dir / "claims.csv");
    std::vector<ClaimRow> rows(claims.rows.size());
    const auto col = [&](const char* name) { return claims.column(name); };
    const std::size_t c_id = col("ClaimID"), c_ph = col("IDPH"), c_contract = col("ContractID"),
                      c_k = col("ClaimIndex"), c_age = col("AgePH"), c_gender = col("GenderPH"),
                      c_expph = col("ExpPH"), c_nr = col("NrContractsPH"), c_expc = col("ExpPHContracts"),
                      c_agecar = col("AgeCar"), c_orig = col("OrigValueCar"), c_value = col("ValueCar"),
                      c_cov = col("Coverage"), c_fuel = col("Fuel"), c_bm = col("BonusMalus"),
                      c_amount = col("ClaimAmount"), c_cage = col("ClaimAge"), c_cdate = col("ClaimDate"),
                      c_police = col("Police"), c_npers = col("nPersons"), c_garage = col("Garage"),
                      c_broker = col("Broker"), c_expert = col("Expert"), c_y = col("Y"),
                      c_yx = col("Yexpert");
    for (std::size_t i = 0; i < claims.rows.size(); ++i) {
        const auto& r = claims.rows[i];
        ClaimRow& row = rows[i];
        row.claim_id = std::stoi(r[c_id]);
        row.ph_id = std::stoi(r[c_ph]);
        row.contract_index = std::stoi(r[c_contract]);
        row.k = std::stoi(r[c_k]);
        row.age_ph = std::stod(r[c_age]);
        row.gender = r[c_gender];
        row.exp_ph = std::stod(r[c_expph]);
        row.nr_contracts = std::stoi(r[c_nr]);
        row.exp_contract = std::stod(r[c_expc]);
        row.age_car = std::stod(r[c_agecar]);
        row.orig_value_car = std::stod(r[c_orig]);
        row.value_car = std::stod(r[c_value]);
        row.coverage = r[c_cov];
        row.fuel = r[c_fuel];
        row.bonus_malus = std::stoi(r[c_bm]);
        row.amount = std::stod(r[c_amount]);
        row.claim_age_months = std::stoi(r[c_cage]);
        row.claim_date_years = std::stod(r[c_cdate]);
        row.police = r[c_police] == "1";
        row.n_persons = std::stoi(r[c_npers]);
        row.garage = std::stoi(r[c_garage]);
        row.broker = std::stoi(r[c_broker]);
        row.expert_party = std::stoi(r[c_expert]);
        row.fraud = r[c_y] == "1";
        row.expert = expert_from(r[c_yx]);
        if (row.claim_id != static_cast<int>(i) + 1) throw IoError("claims.csv ids must be dense and 1-based");
    }

    const io::CsvTable edge_table = io::read_csv(dir / "edges.csv");
    const std::size_t e_claim = edge_table.column("ClaimID");
    const std::size_t e_party = edge_table.column("PartyID");
    const std::size_t e_kind = edge_table.column("PartyKind");
    const std::size_t e_weight = edge_table.column("Weight");
    std::vector<network::Party> parties;
    std::vector<network::Edge> edges;
    std::map<std::pair<std::string, int>, int> party_nodes;
    for (const auto& r : edge_table.rows) {
        const int claim = std::stoi(r[e_claim]) - 1;
        const int label = std::stoi(r[e_party]);
        const std::string& kind_s = r[e_kind];
        network::PartyKind kind;
        if (kind_s == "policyholder") kind = network::PartyKind::policyholder;
        else if (kind_s == "garage") kind = network::PartyKind::garage;
        else if (kind_s == "broker") kind = network::PartyKind::broker;
        else if (kind_s == "expert") kind = network::PartyKind::expert;
        else if (kind_s == "person") kind = network::PartyKind::person;
        else throw IoError("unknown party kind '" + kind_s + "' in edges.csv");
        const auto key = std::make_pair(kind_s, label);
        auto it = party_nodes.find(key);
        int node;
        if (it == party_nodes.end()) {
            node = static_cast<int>(parties.size());
            parties.push_back({kind, label});
            party_nodes.emplace(key, node);
        } else {
            node = it->second;
        }
        edges.push_back({claim, node, std::stod(r[e_weight])});
    }

    LoadedDataset loaded{std::move(rows),
                         network::BipartiteGraph(static_cast<int>(claims.rows.size()), std::move(parties), edges),
                         read_manifest(dir / "manifest.json")};
    return loaded;
}

AnalysisColumns analysis_columns(const std::vector<ClaimRow>& claims,
                                 const std::vector<featurize::FeatureRow>& features) {
    if (claims.size() != features.size()) throw ParameterError("claims/features row counts differ");
    AnalysisColumns out;
    const std::size_t n = claims.size();
    out.age_ph.resize(n);
    out.nr_contracts.resize(n);
    out.claim_amount.resize(n);
    out.claim_age.resize(n);
    out.n1_size.resize(n);
    out.n2_size.resize(n);
    out.n2_ratio_fraud.resize(n);
    out.ground_truth.resize(n);
    out.expert.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.age_ph[i] = claims[i].age_ph;
        out.nr_contracts[i] = static_cast<double>(claims[i].nr_contracts);
        out.claim_amount[i] = claims[i].amount;
        out.claim_age[i] = static_cast<double>(claims[i].claim_age_months);
        out.n1_size[i] = static_cast<double>(features[i].n1_size);
        out.n2_size[i] = static_cast<double>(features[i].n2_size);
        out.n2_ratio_fraud[i] = features[i].n2_ratio_fraud;
        out.ground_truth[i] = claims[i].fraud ? 1 : 0;
        out.expert[i] = claims[i].expert;
    }
    return out;
}

ModelDefinition model1() {
    return {"model1", {"AgePH", "NrContractsPH", "ClaimAmount", "ClaimAge"}};
}

ModelDefinition model2() {
    return {"model2",
            {"AgePH", "NrContractsPH", "ClaimAmount", "ClaimAge", "n1.size", "n2.size", "n2.ratioFraud"}};
}

ModelDefinition model_by_id(const std::string& id) {
    if (id == "model1") return model1();
    if (id == "model2" || id == "dgm") {
        ModelDefinition m = model2();
        m.id = id;
        return m;
    }
    throw ConfigError("unknown model id '" + id + "' (expected model1, model2 or dgm)");
}

namespace {

std::map<std::string, std::vector<double>> normalized_columns(const AnalysisColumns& c) {
    std::map<std::string, std::vector<double>> cols;
    cols["AgePH"] = featurize::normalize_signed_unit_or_zero(c.age_ph);
    cols["NrContractsPH"] = featurize::normalize_signed_unit_or_zero(c.nr_contracts);
    cols["ClaimAmount"] = featurize::normalize_signed_unit_or_zero(c.claim_amount);
    cols["ClaimAge"] = featurize::normalize_signed_unit_or_zero(c.claim_age);
    cols["n1.size"] = featurize::normalize_signed_unit_or_zero(c.n1_size);
    cols["n2.size"] = featurize::normalize_signed_unit_or_zero(c.n2_size);
    cols["n2.ratioFraud"] = featurize::normalize_signed_unit_or_zero(c.n2_ratio_fraud);
    return cols;
}

evaluate::Matrix gather(const std::map<std::string, std::vector<double>>& cols,
                        const std::vector<std::string>& names, const std::vector<std::size_t>& idx) {
    evaluate::Matrix m;
    m.rows = idx.size();
    m.cols = names.size();
    m.data.resize(m.rows * m.cols);
    for (std::size_t j = 0; j < names.size(); ++j) {
        const auto it = cols.find(names[j]);
        if (it == cols.end()) throw SchemaError("unknown model feature '" + names[j] + "'");
        for (std::size_t r = 0; r < idx.size(); ++r) m.at(r, j) = it->second[idx[r]];
    }
    return m;
}

} // namespace

std::vector<evaluate::PerformanceReport> run_experiment(const AnalysisColumns& columns,
                                                        const std::vector<ModelDefinition>& models,
                                                        bool ground_truth_response) {
    const std::size_t n = columns.ground_truth.size();
    std::vector<std::size_t> in_idx, out_idx;
    for (std::size_t i = 0; i < n; ++i) {
        if (columns.expert[i] == investigate::ExpertLabel::uninvestigated) {
            out_idx.push_back(i);
        } else {
            in_idx.push_back(i);
        }
    }
    if (in_idx.empty() || out_idx.empty()) {
        throw DegenerateInputError("experiment requires both investigated and uninvestigated claims");
    }
    std::vector<int> y_in(in_idx.size()), y_out(out_idx.size());
    for (std::size_t r = 0; r < in_idx.size(); ++r) {
        y_in[r] = ground_truth_response
                      ? columns.ground_truth[in_idx[r]]
                      : (columns.expert[in_idx[r]] == investigate::ExpertLabel::fraudulent ? 1 : 0);
    }
    for (std::size_t r = 0; r < out_idx.size(); ++r) y_out[r] = columns.ground_truth[out_idx[r]];

    const auto cols = normalized_columns(columns);
    std::vector<evaluate::PerformanceReport> reports;
    for (const ModelDefinition& model : models) {
        const evaluate::Matrix x_in = gather(cols, model.features, in_idx);
        const evaluate::Matrix x_out = gather(cols, model.features, out_idx);
        reports.push_back(
            evaluate::run_single_experiment(model.id, x_in, y_in, x_out, y_out, model.features));
    }
    return reports;
}

evaluate::LogisticFit recover_coefficients(const AnalysisColumns& columns) {
    const std::size_t n = columns.ground_truth.size();
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    const auto cols = normalized_columns(columns);
    const ModelDefinition dgm = model2();
    const evaluate::Matrix x = gather(cols, dgm.features, all);
    return evaluate::fit_logistic(x, columns.ground_truth, dgm.features);
}

} // namespace engine::dataset
