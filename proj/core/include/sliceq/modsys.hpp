#ifndef SLICEQ_MODSYS_HPP
#define SLICEQ_MODSYS_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "sliceq/types.hpp"

namespace sliceq::modsys {

/// The seven regression techniques compared per KQI. The declaration order
/// is the documented tie-break order for model selection.
enum class RegressorKind { LR, SWLR, DTR, SVM_G, SVM_C, SVM_Q, GPR };

constexpr std::array<RegressorKind, 7> kAllRegressorKinds = {
    RegressorKind::LR,    RegressorKind::SWLR,  RegressorKind::DTR,
    RegressorKind::SVM_G, RegressorKind::SVM_C, RegressorKind::SVM_Q,
    RegressorKind::GPR,
};

std::string_view regressor_name(RegressorKind kind);
std::optional<RegressorKind> regressor_from_name(std::string_view name);

/// Fixed hyperparameters; no nested tuning.
struct Hyperparams {
    double ridge_lambda = 1e-8;   ///< jitter on the OLS normal equations
    int dtr_max_depth = 8;        ///< 0 means unlimited
    int dtr_min_leaf = 5;
    double svm_c = 10.0;          ///< LS-SVM regularization (ridge = 1/C)
    double svm_poly_offset = 1.0;
    double gpr_lengthscale = 1.0;   ///< after feature standardization
    double gpr_signal_var = 1.0;
    double gpr_noise_var = 1e-2;
};

/// Per-feature standardization learned at fit time. Constant features keep
/// a stddev of 1 and are flagged.
struct FeatureScaling {
    std::vector<double> mean;
    std::vector<double> stddev;
    std::vector<bool> constant;

    std::vector<double> apply(std::span<const double> x) const;
};

struct LinearModel {
    std::vector<double> coefficients;  ///< on scaled features, zero if unused
    double intercept = 0.0;
    std::vector<int> selected;  ///< feature indices kept by stepwise search
};

/// Flattened CART node; leaf iff left < 0.
struct TreeNode {
    int feature = -1;
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double value = 0.0;
};

struct TreeModel {
    std::vector<TreeNode> nodes;  ///< nodes[0] is the root
};

enum class KernelKind { Gaussian, Cubic, Quadratic };

/// Least-squares SVM in kernel-ridge form: alpha = (K + I/C)^-1 (y - ymean).
struct SvmModel {
    KernelKind kernel = KernelKind::Gaussian;
    std::vector<std::vector<double>> x;  ///< scaled training inputs
    std::vector<double> alpha;
    double y_mean = 0.0;
    double gauss_sigma = 1.0;  ///< median pairwise distance at fit time
    double poly_gamma = 1.0;   ///< 1 / feature count
    double poly_offset = 1.0;
    double regularization = 0.1;
};

/// GP posterior mean with a squared-exponential kernel.
struct GprModel {
    std::vector<std::vector<double>> x;  ///< scaled training inputs
    std::vector<double> alpha;
    double y_mean = 0.0;
    double lengthscale = 1.0;
    double signal_var = 1.0;
    double noise_var = 1e-2;
};

/// Kernel evaluations of fitted kernel machines, exposed so properties of
/// the kernel (symmetry, positive semidefiniteness) stay checkable.
double svm_kernel_value(const SvmModel& model, std::span<const double> a,
                        std::span<const double> b);
double gpr_kernel_value(const GprModel& model, std::span<const double> a,
                        std::span<const double> b);

struct TrainedModel {
    RegressorKind kind = RegressorKind::LR;
    std::optional<KqiId> target;  ///< set for pipeline models; enables clamping
    FeatureScaling scaling;
    std::variant<LinearModel, TreeModel, SvmModel, GprModel> params;
    double train_r2 = 0.0;  ///< NaN when the training targets were constant
};

/// Fits one regressor on a raw feature matrix (any column count).
/// Throws std::invalid_argument on fewer than 2 rows, ragged rows or
/// non-finite targets.
TrainedModel fit_matrix(RegressorKind kind,
                        const std::vector<std::vector<double>>& features,
                        const std::vector<double>& targets,
                        const Hyperparams& hyper = {});

/// Fits one regressor for one KQI on training rows, using the fixed
/// six-feature encoding. The resulting model clamps its predictions to the
/// KQI physical range.
TrainedModel fit_kqi(RegressorKind kind, const Dataset& rows, KqiId target,
                     const Hyperparams& hyper = {});

/// Applies the stored scaling and the kind-specific predictor. Throws
/// std::invalid_argument on a feature-dimension mismatch.
double predict(const TrainedModel& model, std::span<const double> features);

struct CvResult {
    std::vector<double> fold_r2;  ///< one entry per evaluated fold
    double mean_r2 = 0.0;
    int skipped_folds = 0;  ///< folds with constant held-out actuals
};

/// k-fold cross-validation of one (kind, target) pair. Deterministic per
/// seed; the same seed yields the same folds for every kind.
CvResult cross_validate(RegressorKind kind, const Dataset& rows, KqiId target,
                        std::size_t k, std::uint64_t seed,
                        const Hyperparams& hyper = {});

struct SelectedModel {
    TrainedModel model;
    double cv_r2 = 0.0;
    double holdout_r2;  ///< NaN until measured on a holdout set
    double alpha;       ///< NaN until a security margin is calibrated

    SelectedModel();
};

/// Best-per-KQI selection plus the full score table (the R-squared matrix
/// over kinds x KQIs).
struct ModelRegistry {
    int version = 1;
    std::map<KqiId, SelectedModel> selected;
    std::map<RegressorKind, std::map<KqiId, double>> score_table;

    bool has(KqiId id) const { return selected.count(id) != 0; }
    const SelectedModel& at(KqiId id) const;

    /// Throws std::logic_error if a selected model is not the argmax of its
    /// score-table column (ties resolved by kind declaration order).
    void check_invariant() const;
};

/// The selection rule: argmax score, NaN entries skipped, ties resolved to
/// the kind declared first in RegressorKind. Nullopt when nothing is finite.
std::optional<RegressorKind> pick_best_kind(
    const std::map<RegressorKind, double>& scores);

/// Cross-validates every kind for every KQI, selects the argmax mean
/// R-squared per KQI (ties to the kind declared first) and refits each
/// winner on all provided rows. Kinds that fail get a NaN score; if every
/// kind fails for a target the error names that target.
/// `previous_version` supports the retraining hook: the new registry gets
/// previous_version + 1.
ModelRegistry select_best(const Dataset& rows,
                          const std::vector<RegressorKind>& kinds,
                          std::size_t k, std::uint64_t seed,
                          const Hyperparams& hyper = {},
                          int previous_version = 0);

struct LatencyStats {
    double min_us = 0.0;
    double median_us = 0.0;
    double p95_us = 0.0;
    std::vector<double> samples_us;  ///< one per repetition
};

/// Wall-clock per-prediction latency over `repetitions` passes through
/// `inputs`. Single-threaded. Throws std::invalid_argument on repetitions
/// < 1 or empty inputs.
LatencyStats estimation_latency(const TrainedModel& model,
                                const std::vector<std::vector<double>>& inputs,
                                int repetitions);

/// Registry persistence (documented JSON schema, lossless round-trip).
void save_registry(const ModelRegistry& registry,
                   const std::filesystem::path& path);
ModelRegistry load_registry(const std::filesystem::path& path);

/// Kind x KQI mean CV R-squared table as CSV (rows = kinds, columns = KQIs).
void save_score_table(const ModelRegistry& registry,
                      const std::filesystem::path& path);

}  // namespace sliceq::modsys

#endif  // SLICEQ_MODSYS_HPP
