#include "sliceq/modsys.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "csv_util.hpp"
#include "sliceq/metrics.hpp"
#include "sliceq/split.hpp"

namespace sliceq::modsys {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

volatile double g_latency_sink = 0.0;

double json_number(const json& j) {
    return j.is_null() ? kNaN : j.get<double>();
}

bool score_variance_ok(const std::vector<double>& v) {
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] != v[0]) return true;
    }
    return false;
}

}  // namespace

SelectedModel::SelectedModel() : holdout_r2(kNaN), alpha(kNaN) {}

const SelectedModel& ModelRegistry::at(KqiId id) const {
    const auto it = selected.find(id);
    if (it == selected.end()) {
        throw std::invalid_argument("ModelRegistry: no model for target " +
                                    std::string(kqi_name(id)));
    }
    return it->second;
}

void ModelRegistry::check_invariant() const {
    for (const auto& [target, sel] : selected) {
        std::map<RegressorKind, double> scores;
        for (const auto& [kind, row] : score_table) {
            const auto cell = row.find(target);
            if (cell != row.end()) scores[kind] = cell->second;
        }
        const auto best = pick_best_kind(scores);
        if (!best || *best != sel.model.kind) {
            throw std::logic_error(
                "ModelRegistry: selected model for " +
                std::string(kqi_name(target)) +
                " is not the argmax of the score table");
        }
    }
}

CvResult cross_validate(RegressorKind kind, const Dataset& rows, KqiId target,
                        std::size_t k, std::uint64_t seed,
                        const Hyperparams& hyper) {
    if (k < 2) throw std::invalid_argument("cross_validate: k must be >= 2");
    const auto folds = kfold_split(rows.size(), k, seed);

    CvResult result;
    for (const auto& fold : folds) {
        std::vector<char> held(rows.size(), 0);
        for (std::size_t i : fold) held[i] = 1;

        std::vector<double> actual;
        actual.reserve(fold.size());
        for (std::size_t i : fold) {
            actual.push_back(kqi_value(rows[i].kqi, target));
        }
        if (!score_variance_ok(actual)) {
            result.skipped_folds += 1;  // constant actuals, R2 undefined
            continue;
        }

        Dataset train;
        train.reserve(rows.size() - fold.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (!held[i]) train.push_back(rows[i]);
        }
        const TrainedModel model = fit_kqi(kind, train, target, hyper);

        std::vector<double> predicted;
        predicted.reserve(fold.size());
        for (std::size_t i : fold) {
            predicted.push_back(predict(model, feature_vector(rows[i])));
        }
        result.fold_r2.push_back(r_squared(actual, predicted));
    }

    if (result.fold_r2.empty()) {
        result.mean_r2 = kNaN;
    } else {
        double sum = 0.0;
        for (double s : result.fold_r2) sum += s;
        result.mean_r2 = sum / static_cast<double>(result.fold_r2.size());
    }
    return result;
}

std::optional<RegressorKind> pick_best_kind(
    const std::map<RegressorKind, double>& scores) {
    std::optional<RegressorKind> best;
    double best_score = -std::numeric_limits<double>::infinity();
    // Enum order doubles as the documented tie-break order.
    for (RegressorKind kind : kAllRegressorKinds) {
        const auto it = scores.find(kind);
        if (it == scores.end() || !std::isfinite(it->second)) continue;
        if (!best || it->second > best_score) {
            best = kind;
            best_score = it->second;
        }
    }
    return best;
}

ModelRegistry select_best(const Dataset& rows,
                          const std::vector<RegressorKind>& kinds,
                          std::size_t k, std::uint64_t seed,
                          const Hyperparams& hyper, int previous_version) {
    if (kinds.empty()) {
        throw std::invalid_argument("select_best: empty kind list");
    }
    const std::set<RegressorKind> requested(kinds.begin(), kinds.end());

    ModelRegistry registry;
    registry.version = previous_version + 1;

    for (KqiId target : kAllKqis) {
        std::map<RegressorKind, double> scores;
        for (RegressorKind kind : kAllRegressorKinds) {
            if (requested.count(kind) == 0) continue;
            double score = kNaN;
            try {
                score = cross_validate(kind, rows, target, k, seed, hyper)
                            .mean_r2;
            } catch (const std::exception&) {
                // kind failed for this target; recorded as NaN
            }
            scores[kind] = score;
            registry.score_table[kind][target] = score;
        }
        const auto best_kind = pick_best_kind(scores);
        if (!best_kind) {
            throw std::runtime_error(
                "select_best: every regressor failed for target " +
                std::string(kqi_name(target)));
        }

        SelectedModel sel;
        sel.model = fit_kqi(*best_kind, rows, target, hyper);
        sel.cv_r2 = scores.at(*best_kind);
        registry.selected.emplace(target, std::move(sel));
    }
    return registry;
}

LatencyStats estimation_latency(const TrainedModel& model,
                                const std::vector<std::vector<double>>& inputs,
                                int repetitions) {
    if (repetitions < 1) {
        throw std::invalid_argument(
            "estimation_latency: repetitions must be >= 1");
    }
    if (inputs.empty()) {
        throw std::invalid_argument("estimation_latency: no inputs");
    }

    using clock = std::chrono::steady_clock;
    // Warm pass so first-touch effects do not land in the first sample.
    for (const auto& in : inputs) g_latency_sink = predict(model, in);

    LatencyStats stats;
    stats.samples_us.reserve(repetitions);
    for (int r = 0; r < repetitions; ++r) {
        const auto t0 = clock::now();
        for (const auto& in : inputs) {
            g_latency_sink = predict(model, in);
        }
        const auto t1 = clock::now();
        const double ns =
            std::chrono::duration_cast<std::chrono::nanoseconds>(t1 - t0)
                .count();
        stats.samples_us.push_back(ns / 1000.0 /
                                   static_cast<double>(inputs.size()));
    }

    std::vector<double> sorted = stats.samples_us;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    stats.min_us = sorted.front();
    stats.median_us = n % 2 == 1
                          ? sorted[n / 2]
                          : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    const auto rank = static_cast<std::size_t>(
        std::ceil(0.95 * static_cast<double>(n)));
    stats.p95_us = sorted[std::max<std::size_t>(rank, 1) - 1];
    return stats;
}

// ---------------------------------------------------------------------------
// Registry persistence.
// ---------------------------------------------------------------------------

namespace {

json scaling_to_json(const FeatureScaling& s) {
    json j;
    j["mean"] = s.mean;
    j["std"] = s.stddev;
    j["constant"] = s.constant;
    return j;
}

FeatureScaling scaling_from_json(const json& j) {
    FeatureScaling s;
    s.mean = j.at("mean").get<std::vector<double>>();
    s.stddev = j.at("std").get<std::vector<double>>();
    s.constant = j.at("constant").get<std::vector<bool>>();
    if (s.mean.size() != s.stddev.size() ||
        s.mean.size() != s.constant.size()) {
        throw std::runtime_error("registry: inconsistent scaling arrays");
    }
    return s;
}

std::string_view kernel_name(KernelKind k) {
    switch (k) {
        case KernelKind::Gaussian: return "gaussian";
        case KernelKind::Cubic: return "cubic";
        case KernelKind::Quadratic: return "quadratic";
    }
    throw std::logic_error("kernel_name: unknown kernel");
}

KernelKind kernel_from_name(const std::string& name) {
    if (name == "gaussian") return KernelKind::Gaussian;
    if (name == "cubic") return KernelKind::Cubic;
    if (name == "quadratic") return KernelKind::Quadratic;
    throw std::runtime_error("registry: unknown kernel '" + name + "'");
}

json params_to_json(const TrainedModel& model) {
    json j;
    if (const auto* lin = std::get_if<LinearModel>(&model.params)) {
        j["coefficients"] = lin->coefficients;
        j["intercept"] = lin->intercept;
        j["selected"] = lin->selected;
    } else if (const auto* tree = std::get_if<TreeModel>(&model.params)) {
        json nodes = json::array();
        for (const TreeNode& nd : tree->nodes) {
            nodes.push_back({{"feature", nd.feature},
                             {"threshold", nd.threshold},
                             {"left", nd.left},
                             {"right", nd.right},
                             {"value", nd.value}});
        }
        j["nodes"] = std::move(nodes);
    } else if (const auto* svm = std::get_if<SvmModel>(&model.params)) {
        j["kernel"] = kernel_name(svm->kernel);
        j["x"] = svm->x;
        j["alpha"] = svm->alpha;
        j["y_mean"] = svm->y_mean;
        j["gauss_sigma"] = svm->gauss_sigma;
        j["poly_gamma"] = svm->poly_gamma;
        j["poly_offset"] = svm->poly_offset;
        j["regularization"] = svm->regularization;
    } else {
        const auto& gpr = std::get<GprModel>(model.params);
        j["x"] = gpr.x;
        j["alpha"] = gpr.alpha;
        j["y_mean"] = gpr.y_mean;
        j["lengthscale"] = gpr.lengthscale;
        j["signal_var"] = gpr.signal_var;
        j["noise_var"] = gpr.noise_var;
    }
    return j;
}

void params_from_json(const json& j, TrainedModel& model) {
    switch (model.kind) {
        case RegressorKind::LR:
        case RegressorKind::SWLR: {
            LinearModel lin;
            lin.coefficients = j.at("coefficients").get<std::vector<double>>();
            lin.intercept = j.at("intercept").get<double>();
            lin.selected = j.at("selected").get<std::vector<int>>();
            model.params = std::move(lin);
            break;
        }
        case RegressorKind::DTR: {
            TreeModel tree;
            for (const json& nj : j.at("nodes")) {
                TreeNode nd;
                nd.feature = nj.at("feature").get<int>();
                nd.threshold = nj.at("threshold").get<double>();
                nd.left = nj.at("left").get<int>();
                nd.right = nj.at("right").get<int>();
                nd.value = nj.at("value").get<double>();
                tree.nodes.push_back(nd);
            }
            if (tree.nodes.empty()) {
                throw std::runtime_error("registry: empty DTR node list");
            }
            model.params = std::move(tree);
            break;
        }
        case RegressorKind::SVM_G:
        case RegressorKind::SVM_C:
        case RegressorKind::SVM_Q: {
            SvmModel svm;
            svm.kernel = kernel_from_name(j.at("kernel").get<std::string>());
            svm.x = j.at("x").get<std::vector<std::vector<double>>>();
            svm.alpha = j.at("alpha").get<std::vector<double>>();
            svm.y_mean = j.at("y_mean").get<double>();
            svm.gauss_sigma = j.at("gauss_sigma").get<double>();
            svm.poly_gamma = j.at("poly_gamma").get<double>();
            svm.poly_offset = j.at("poly_offset").get<double>();
            svm.regularization = j.at("regularization").get<double>();
            if (svm.x.size() != svm.alpha.size()) {
                throw std::runtime_error("registry: SVM x/alpha mismatch");
            }
            model.params = std::move(svm);
            break;
        }
        case RegressorKind::GPR: {
            GprModel gpr;
            gpr.x = j.at("x").get<std::vector<std::vector<double>>>();
            gpr.alpha = j.at("alpha").get<std::vector<double>>();
            gpr.y_mean = j.at("y_mean").get<double>();
            gpr.lengthscale = j.at("lengthscale").get<double>();
            gpr.signal_var = j.at("signal_var").get<double>();
            gpr.noise_var = j.at("noise_var").get<double>();
            if (gpr.x.size() != gpr.alpha.size()) {
                throw std::runtime_error("registry: GPR x/alpha mismatch");
            }
            model.params = std::move(gpr);
            break;
        }
    }
}

}  // namespace

void save_registry(const ModelRegistry& registry,
                   const std::filesystem::path& path) {
    json j;
    j["schema"] = "sliceq-registry-v1";
    j["version"] = registry.version;
    {
        json names = json::array();
        for (auto name : kFeatureNames) names.push_back(std::string(name));
        j["feature_names"] = std::move(names);
    }

    json table;
    for (const auto& [kind, row] : registry.score_table) {
        json jrow;
        for (const auto& [target, score] : row) {
            jrow[std::string(kqi_name(target))] = score;
        }
        table[std::string(regressor_name(kind))] = std::move(jrow);
    }
    j["score_table"] = std::move(table);

    json models;
    for (const auto& [target, sel] : registry.selected) {
        json jm;
        jm["kind"] = std::string(regressor_name(sel.model.kind));
        jm["cv_r2"] = sel.cv_r2;
        jm["holdout_r2"] = sel.holdout_r2;
        jm["alpha"] = sel.alpha;
        jm["train_r2"] = sel.model.train_r2;
        jm["scaling"] = scaling_to_json(sel.model.scaling);
        jm["params"] = params_to_json(sel.model);
        models[std::string(kqi_name(target))] = std::move(jm);
    }
    j["models"] = std::move(models);

    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_registry: cannot open " + path.string());
    }
    out << j.dump(2) << '\n';
    if (!out) {
        throw std::runtime_error("save_registry: write failed for " +
                                 path.string());
    }
}

ModelRegistry load_registry(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::runtime_error("load_registry: cannot open " + path.string());
    }
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw std::runtime_error("load_registry: " + path.string() + ": " +
                                 e.what());
    }
    if (j.value("schema", "") != "sliceq-registry-v1") {
        throw std::runtime_error("load_registry: " + path.string() +
                                 ": unknown schema");
    }

    ModelRegistry registry;
    registry.version = j.at("version").get<int>();

    for (const auto& [kind_name, row] : j.at("score_table").items()) {
        const auto kind = regressor_from_name(kind_name);
        if (!kind) {
            throw std::runtime_error("load_registry: unknown kind '" +
                                     kind_name + "' in score table");
        }
        for (const auto& [target_name, score] : row.items()) {
            const auto target = kqi_from_name(target_name);
            if (!target) {
                throw std::runtime_error("load_registry: unknown KQI '" +
                                         target_name + "' in score table");
            }
            registry.score_table[*kind][*target] = json_number(score);
        }
    }

    for (const auto& [target_name, jm] : j.at("models").items()) {
        const auto target = kqi_from_name(target_name);
        if (!target) {
            throw std::runtime_error("load_registry: unknown KQI '" +
                                     target_name + "'");
        }
        const auto kind =
            regressor_from_name(jm.at("kind").get<std::string>());
        if (!kind) {
            throw std::runtime_error("load_registry: unknown kind for '" +
                                     target_name + "'");
        }
        SelectedModel sel;
        sel.model.kind = *kind;
        sel.model.target = *target;
        sel.cv_r2 = json_number(jm.at("cv_r2"));
        sel.holdout_r2 = json_number(jm.at("holdout_r2"));
        sel.alpha = json_number(jm.at("alpha"));
        sel.model.train_r2 = json_number(jm.at("train_r2"));
        sel.model.scaling = scaling_from_json(jm.at("scaling"));
        params_from_json(jm.at("params"), sel.model);
        registry.selected.emplace(*target, std::move(sel));
    }
    return registry;
}

void save_score_table(const ModelRegistry& registry,
                      const std::filesystem::path& path) {
    std::ofstream out(path);
    if (!out) {
        throw std::runtime_error("save_score_table: cannot open " +
                                 path.string());
    }
    out << "kind";
    for (KqiId target : kAllKqis) out << ',' << kqi_name(target);
    out << '\n';
    for (RegressorKind kind : kAllRegressorKinds) {
        const auto row = registry.score_table.find(kind);
        if (row == registry.score_table.end()) continue;
        out << regressor_name(kind);
        for (KqiId target : kAllKqis) {
            const auto cell = row->second.find(target);
            out << ',';
            if (cell != row->second.end()) {
                out << detail::format_double(cell->second);
            }
        }
        out << '\n';
    }
    if (!out) {
        throw std::runtime_error("save_score_table: write failed for " +
                                 path.string());
    }
}

}  // namespace sliceq::modsys
