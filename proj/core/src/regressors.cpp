#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

#include "sliceq/metrics.hpp"
#include "sliceq/modsys.hpp"

namespace sliceq::modsys {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

MatrixXd to_matrix(const std::vector<std::vector<double>>& rows,
                   std::size_t cols) {
    MatrixXd m(rows.size(), cols);
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols; ++j) m(i, j) = rows[i][j];
    }
    return m;
}

FeatureScaling compute_scaling(const MatrixXd& x) {
    FeatureScaling s;
    const auto n = static_cast<double>(x.rows());
    s.mean.resize(x.cols());
    s.stddev.resize(x.cols());
    s.constant.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        const double mu = x.col(j).mean();
        const double var = (x.col(j).array() - mu).square().sum() / n;
        const double sd = std::sqrt(var);
        s.mean[j] = mu;
        s.constant[j] = sd <= 0.0;
        s.stddev[j] = s.constant[j] ? 1.0 : sd;
    }
    return s;
}

MatrixXd apply_scaling(const FeatureScaling& s, const MatrixXd& x) {
    MatrixXd out = x;
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        out.col(j) = (x.col(j).array() - s.mean[j]) / s.stddev[j];
    }
    return out;
}

// ---------------------------------------------------------------------------
// Ordinary least squares (ridge-jittered normal equations).
// ---------------------------------------------------------------------------

struct OlsFit {
    VectorXd coeffs;  // per included column
    double intercept = 0.0;
    double rss = 0.0;
};

OlsFit ols(const MatrixXd& x, const VectorXd& y,
           const std::vector<int>& columns, double lambda) {
    const auto n = x.rows();
    const auto p = static_cast<Eigen::Index>(columns.size());
    MatrixXd a(n, p + 1);
    a.col(0).setOnes();
    for (Eigen::Index j = 0; j < p; ++j) a.col(j + 1) = x.col(columns[j]);

    MatrixXd gram = a.transpose() * a;
    gram.diagonal().array() += lambda;
    const VectorXd rhs = a.transpose() * y;
    const VectorXd beta = gram.ldlt().solve(rhs);
    if (!beta.allFinite()) {
        throw std::runtime_error("OLS: singular system after ridge jitter");
    }

    OlsFit fit;
    fit.intercept = beta(0);
    fit.coeffs = beta.tail(p);
    fit.rss = (y - a * beta).squaredNorm();
    return fit;
}

LinearModel linear_fit(const MatrixXd& xs, const VectorXd& y, double lambda) {
    std::vector<int> all(xs.cols());
    std::iota(all.begin(), all.end(), 0);
    const OlsFit fit = ols(xs, y, all, lambda);

    LinearModel m;
    m.coefficients.assign(fit.coeffs.data(), fit.coeffs.data() + xs.cols());
    m.intercept = fit.intercept;
    m.selected = all;
    return m;
}

// Forward stepwise selection minimizing AIC = n ln(RSS/n) + 2 (p+1).
LinearModel stepwise_fit(const MatrixXd& xs, const VectorXd& y,
                         double lambda) {
    const auto n = static_cast<double>(xs.rows());
    const double rss_floor = 1e-12;
    auto aic = [&](double rss, std::size_t n_params) {
        return n * std::log(std::max(rss, rss_floor) / n) +
               2.0 * static_cast<double>(n_params + 1);
    };

    std::vector<int> selected;
    const double base_rss = (y.array() - y.mean()).square().sum();
    double best_aic = aic(base_rss, 0);

    std::vector<char> in_model(xs.cols(), 0);
    while (true) {
        int best_j = -1;
        double best_candidate_aic = best_aic;
        for (int j = 0; j < xs.cols(); ++j) {
            if (in_model[j]) continue;
            std::vector<int> trial = selected;
            trial.push_back(j);
            const OlsFit fit = ols(xs, y, trial, lambda);
            const double candidate = aic(fit.rss, trial.size());
            if (candidate < best_candidate_aic - 1e-12) {
                best_candidate_aic = candidate;
                best_j = j;
            }
        }
        if (best_j < 0) break;
        selected.push_back(best_j);
        in_model[best_j] = 1;
        best_aic = best_candidate_aic;
    }

    LinearModel m;
    m.coefficients.assign(xs.cols(), 0.0);
    if (selected.empty()) {
        m.intercept = y.mean();
    } else {
        const OlsFit fit = ols(xs, y, selected, lambda);
        m.intercept = fit.intercept;
        for (std::size_t i = 0; i < selected.size(); ++i) {
            m.coefficients[selected[i]] = fit.coeffs(i);
        }
    }
    m.selected = selected;
    return m;
}

// ---------------------------------------------------------------------------
// CART regression tree, variance-reduction splits.
// ---------------------------------------------------------------------------

struct SplitChoice {
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

double subset_sse(const VectorXd& y, const std::vector<int>& idx) {
    double mean = 0.0;
    for (int i : idx) mean += y(i);
    mean /= static_cast<double>(idx.size());
    double sse = 0.0;
    for (int i : idx) sse += (y(i) - mean) * (y(i) - mean);
    return sse;
}

// Best split over midpoints of consecutive distinct sorted feature values,
// scanning with prefix sums. Both children must keep >= min_leaf rows.
SplitChoice best_split(const MatrixXd& x, const VectorXd& y,
                       const std::vector<int>& idx, int min_leaf) {
    SplitChoice best;
    const auto m = static_cast<int>(idx.size());
    std::vector<int> order(idx);
    for (int j = 0; j < x.cols(); ++j) {
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            if (x(a, j) != x(b, j)) return x(a, j) < x(b, j);
            return a < b;
        });
        double left_sum = 0.0, left_sq = 0.0;
        double total_sum = 0.0, total_sq = 0.0;
        for (int i : order) {
            total_sum += y(i);
            total_sq += y(i) * y(i);
        }
        for (int split = 1; split < m; ++split) {
            const int prev = order[split - 1];
            left_sum += y(prev);
            left_sq += y(prev) * y(prev);
            const double lo = x(prev, j);
            const double hi = x(order[split], j);
            if (!(hi > lo)) continue;  // identical values cannot separate
            if (split < min_leaf || m - split < min_leaf) continue;
            const auto nl = static_cast<double>(split);
            const auto nr = static_cast<double>(m - split);
            const double right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse = (left_sq - left_sum * left_sum / nl) +
                               (right_sq - right_sum * right_sum / nr);
            if (sse < best.sse - 1e-12) {
                best.sse = sse;
                best.feature = j;
                best.threshold = lo + 0.5 * (hi - lo);
            }
        }
    }
    return best;
}

int grow_tree(const MatrixXd& x, const VectorXd& y, std::vector<int>& idx,
              int depth, int max_depth, int min_leaf,
              std::vector<TreeNode>& nodes) {
    const int node_id = static_cast<int>(nodes.size());
    nodes.emplace_back();
    double mean = 0.0;
    for (int i : idx) mean += y(i);
    mean /= static_cast<double>(idx.size());
    nodes[node_id].value = mean;

    const bool depth_ok = max_depth <= 0 || depth < max_depth;
    if (!depth_ok || static_cast<int>(idx.size()) < 2 * min_leaf) {
        return node_id;
    }

    const SplitChoice split = best_split(x, y, idx, min_leaf);
    const double parent_sse = subset_sse(y, idx);
    if (split.feature < 0 || !(split.sse < parent_sse - 1e-12)) {
        return node_id;  // no variance-reducing split
    }

    std::vector<int> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (int i : idx) {
        (x(i, split.feature) <= split.threshold ? left_idx : right_idx)
            .push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    nodes[node_id].feature = split.feature;
    nodes[node_id].threshold = split.threshold;
    const int left =
        grow_tree(x, y, left_idx, depth + 1, max_depth, min_leaf, nodes);
    const int right =
        grow_tree(x, y, right_idx, depth + 1, max_depth, min_leaf, nodes);
    nodes[node_id].left = left;
    nodes[node_id].right = right;
    return node_id;
}

TreeModel tree_fit(const MatrixXd& xs, const VectorXd& y,
                   const Hyperparams& hyper) {
    if (hyper.dtr_min_leaf < 1) {
        throw std::invalid_argument("DTR: min_leaf must be >= 1");
    }
    if (static_cast<int>(xs.rows()) < hyper.dtr_min_leaf) {
        throw std::invalid_argument("DTR: fewer rows than min_leaf");
    }
    TreeModel m;
    std::vector<int> idx(xs.rows());
    std::iota(idx.begin(), idx.end(), 0);
    grow_tree(xs, y, idx, 0, hyper.dtr_max_depth, hyper.dtr_min_leaf, m.nodes);
    return m;
}

double tree_predict(const TreeModel& m, std::span<const double> xs) {
    int node = 0;
    while (m.nodes[node].left >= 0) {
        const TreeNode& nd = m.nodes[node];
        node = xs[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return m.nodes[node].value;
}

// ---------------------------------------------------------------------------
// Kernel machines: LS-SVM (kernel ridge) and GP regression.
// ---------------------------------------------------------------------------

double sq_dist(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        s += d * d;
    }
    return s;
}

double svm_kernel(const SvmModel& m, std::span<const double> a,
                  std::span<const double> b) {
    switch (m.kernel) {
        case KernelKind::Gaussian:
            return std::exp(-sq_dist(a, b) /
                            (2.0 * m.gauss_sigma * m.gauss_sigma));
        case KernelKind::Cubic:
        case KernelKind::Quadratic: {
            double dot = 0.0;
            for (std::size_t i = 0; i < a.size(); ++i) dot += a[i] * b[i];
            const double base = m.poly_gamma * dot + m.poly_offset;
            return m.kernel == KernelKind::Cubic ? base * base * base
                                                 : base * base;
        }
    }
    throw std::logic_error("svm_kernel: unknown kernel");
}

double median_pairwise_distance(const std::vector<std::vector<double>>& x) {
    std::vector<double> dists;
    dists.reserve(x.size() * (x.size() - 1) / 2);
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = i + 1; j < x.size(); ++j) {
            dists.push_back(std::sqrt(sq_dist(x[i], x[j])));
        }
    }
    if (dists.empty()) return 1.0;
    const auto mid = dists.size() / 2;
    std::nth_element(dists.begin(), dists.begin() + mid, dists.end());
    const double med = dists[mid];
    return med > 0.0 ? med : 1.0;
}

std::vector<std::vector<double>> matrix_rows(const MatrixXd& m) {
    std::vector<std::vector<double>> rows(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        rows[i].resize(m.cols());
        for (Eigen::Index j = 0; j < m.cols(); ++j) rows[i][j] = m(i, j);
    }
    return rows;
}

VectorXd solve_spd(MatrixXd k, const VectorXd& rhs, const char* what) {
    Eigen::LLT<MatrixXd> llt(k);
    if (llt.info() == Eigen::Success) return llt.solve(rhs);
    Eigen::LDLT<MatrixXd> ldlt(k);
    const VectorXd sol = ldlt.solve(rhs);
    if (ldlt.info() != Eigen::Success || !sol.allFinite()) {
        throw std::runtime_error(std::string(what) +
                                 ": kernel system is singular");
    }
    return sol;
}

SvmModel svm_fit(RegressorKind kind, const MatrixXd& xs, const VectorXd& y,
                 const Hyperparams& hyper) {
    if (!(hyper.svm_c > 0.0)) {
        throw std::invalid_argument("SVM: C must be > 0");
    }
    SvmModel m;
    m.kernel = kind == RegressorKind::SVM_G   ? KernelKind::Gaussian
               : kind == RegressorKind::SVM_C ? KernelKind::Cubic
                                              : KernelKind::Quadratic;
    m.x = matrix_rows(xs);
    m.poly_gamma = 1.0 / static_cast<double>(xs.cols());
    m.poly_offset = hyper.svm_poly_offset;
    m.regularization = 1.0 / hyper.svm_c;
    m.gauss_sigma = median_pairwise_distance(m.x);
    m.y_mean = y.mean();

    const auto n = xs.rows();
    MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v = svm_kernel(m, m.x[i], m.x[j]);
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    k.diagonal().array() += m.regularization;
    const VectorXd centered = y.array() - m.y_mean;
    const VectorXd alpha = solve_spd(k, centered, "LS-SVM");
    m.alpha.assign(alpha.data(), alpha.data() + n);
    return m;
}

double svm_predict(const SvmModel& m, std::span<const double> xs) {
    double acc = m.y_mean;
    for (std::size_t i = 0; i < m.x.size(); ++i) {
        acc += m.alpha[i] * svm_kernel(m, m.x[i], xs);
    }
    return acc;
}

GprModel gpr_fit(const MatrixXd& xs, const VectorXd& y,
                 const Hyperparams& hyper) {
    if (!(hyper.gpr_lengthscale > 0.0) || !(hyper.gpr_signal_var > 0.0) ||
        !(hyper.gpr_noise_var >= 0.0)) {
        throw std::invalid_argument("GPR: invalid kernel hyperparameters");
    }
    GprModel m;
    m.x = matrix_rows(xs);
    m.lengthscale = hyper.gpr_lengthscale;
    m.signal_var = hyper.gpr_signal_var;
    m.noise_var = hyper.gpr_noise_var;
    m.y_mean = y.mean();

    const auto n = xs.rows();
    MatrixXd k(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = i; j < n; ++j) {
            const double v =
                m.signal_var * std::exp(-sq_dist(m.x[i], m.x[j]) /
                                        (2.0 * m.lengthscale * m.lengthscale));
            k(i, j) = v;
            k(j, i) = v;
        }
    }
    k.diagonal().array() += m.noise_var;
    const VectorXd centered = y.array() - m.y_mean;
    const VectorXd alpha = solve_spd(k, centered, "GPR");
    m.alpha.assign(alpha.data(), alpha.data() + n);
    return m;
}

double gpr_predict(const GprModel& m, std::span<const double> xs) {
    double acc = m.y_mean;
    const double denom = 2.0 * m.lengthscale * m.lengthscale;
    for (std::size_t i = 0; i < m.x.size(); ++i) {
        acc += m.alpha[i] * m.signal_var *
               std::exp(-sq_dist(m.x[i], xs) / denom);
    }
    return acc;
}

double linear_predict(const LinearModel& m, std::span<const double> xs) {
    double acc = m.intercept;
    for (std::size_t j = 0; j < m.coefficients.size(); ++j) {
        acc += m.coefficients[j] * xs[j];
    }
    return acc;
}

}  // namespace

double svm_kernel_value(const SvmModel& model, std::span<const double> a,
                        std::span<const double> b) {
    return svm_kernel(model, a, b);
}

double gpr_kernel_value(const GprModel& model, std::span<const double> a,
                        std::span<const double> b) {
    return model.signal_var *
           std::exp(-sq_dist(a, b) /
                    (2.0 * model.lengthscale * model.lengthscale));
}

std::string_view regressor_name(RegressorKind kind) {
    switch (kind) {
        case RegressorKind::LR: return "LR";
        case RegressorKind::SWLR: return "SWLR";
        case RegressorKind::DTR: return "DTR";
        case RegressorKind::SVM_G: return "SVM_G";
        case RegressorKind::SVM_C: return "SVM_C";
        case RegressorKind::SVM_Q: return "SVM_Q";
        case RegressorKind::GPR: return "GPR";
    }
    throw std::invalid_argument("regressor_name: unknown kind");
}

std::optional<RegressorKind> regressor_from_name(std::string_view name) {
    for (RegressorKind kind : kAllRegressorKinds) {
        if (regressor_name(kind) == name) return kind;
    }
    return std::nullopt;
}

std::vector<double> FeatureScaling::apply(std::span<const double> x) const {
    if (x.size() != mean.size()) {
        throw std::invalid_argument("predict: feature dimension mismatch");
    }
    std::vector<double> out(x.size());
    for (std::size_t j = 0; j < x.size(); ++j) {
        out[j] = (x[j] - mean[j]) / stddev[j];
    }
    return out;
}

TrainedModel fit_matrix(RegressorKind kind,
                        const std::vector<std::vector<double>>& features,
                        const std::vector<double>& targets,
                        const Hyperparams& hyper) {
    if (features.size() < 2) {
        throw std::invalid_argument("fit: need at least 2 rows");
    }
    if (features.size() != targets.size()) {
        throw std::invalid_argument("fit: features/targets length mismatch");
    }
    const std::size_t cols = features.front().size();
    if (cols == 0) throw std::invalid_argument("fit: zero-width features");
    for (const auto& row : features) {
        if (row.size() != cols) {
            throw std::invalid_argument("fit: ragged feature matrix");
        }
        for (double v : row) {
            if (!std::isfinite(v)) {
                throw std::invalid_argument("fit: non-finite feature value");
            }
        }
    }
    for (double t : targets) {
        if (!std::isfinite(t)) {
            throw std::invalid_argument("fit: non-finite target value");
        }
    }

    const MatrixXd x = to_matrix(features, cols);
    const VectorXd y =
        Eigen::Map<const VectorXd>(targets.data(), targets.size());

    TrainedModel model;
    model.kind = kind;
    model.scaling = compute_scaling(x);
    const MatrixXd xs = apply_scaling(model.scaling, x);

    switch (kind) {
        case RegressorKind::LR:
            model.params = linear_fit(xs, y, hyper.ridge_lambda);
            break;
        case RegressorKind::SWLR:
            model.params = stepwise_fit(xs, y, hyper.ridge_lambda);
            break;
        case RegressorKind::DTR:
            model.params = tree_fit(xs, y, hyper);
            break;
        case RegressorKind::SVM_G:
        case RegressorKind::SVM_C:
        case RegressorKind::SVM_Q:
            model.params = svm_fit(kind, xs, y, hyper);
            break;
        case RegressorKind::GPR:
            model.params = gpr_fit(xs, y, hyper);
            break;
    }

    const double y_var = (y.array() - y.mean()).square().sum();
    if (y_var > 0.0) {
        std::vector<double> predicted(targets.size());
        for (std::size_t i = 0; i < features.size(); ++i) {
            predicted[i] = predict(model, features[i]);
        }
        model.train_r2 = r_squared(targets, predicted);
    } else {
        model.train_r2 = kNaN;
    }
    return model;
}

TrainedModel fit_kqi(RegressorKind kind, const Dataset& rows, KqiId target,
                     const Hyperparams& hyper) {
    std::vector<std::vector<double>> features;
    std::vector<double> targets;
    features.reserve(rows.size());
    targets.reserve(rows.size());
    for (const auto& row : rows) {
        const FeatureVector f = feature_vector(row);
        features.emplace_back(f.begin(), f.end());
        targets.push_back(kqi_value(row.kqi, target));
    }
    TrainedModel model = fit_matrix(kind, features, targets, hyper);
    model.target = target;
    return model;
}

double predict(const TrainedModel& model, std::span<const double> features) {
    const std::vector<double> xs = model.scaling.apply(features);
    double raw = 0.0;
    if (const auto* lin = std::get_if<LinearModel>(&model.params)) {
        raw = linear_predict(*lin, xs);
    } else if (const auto* tree = std::get_if<TreeModel>(&model.params)) {
        raw = tree_predict(*tree, xs);
    } else if (const auto* svm = std::get_if<SvmModel>(&model.params)) {
        raw = svm_predict(*svm, xs);
    } else {
        raw = gpr_predict(std::get<GprModel>(model.params), xs);
    }
    return model.target ? clamp_to_range(raw, *model.target) : raw;
}

}  // namespace sliceq::modsys
