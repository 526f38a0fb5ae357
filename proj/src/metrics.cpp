#include "adir/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "adir/error.hpp"
#include "adir/ops.hpp"

namespace adir {

long long ConfusionMatrix::total() const {
    long long t = 0;
    for (long long v : counts)
        t += v;
    return t;
}

long long ConfusionMatrix::row_sum(int i) const {
    long long t = 0;
    for (int j = 0; j < classes; ++j)
        t += at(i, j);
    return t;
}

long long ConfusionMatrix::col_sum(int j) const {
    long long t = 0;
    for (int i = 0; i < classes; ++i)
        t += at(i, j);
    return t;
}

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          int classes) {
    if (truth.size() != predicted.size())
        throw LengthMismatch("truth and prediction lengths differ");
    ConfusionMatrix c;
    c.classes = classes;
    c.counts.assign(static_cast<size_t>(classes) * classes, 0);
    for (size_t k = 0; k < truth.size(); ++k) {
        if (truth[k] < 0 || truth[k] >= classes || predicted[k] < 0 ||
            predicted[k] >= classes)
            throw IndexOutOfRange("class index outside [0, classes)");
        ++c.at(truth[k], predicted[k]);
    }
    return c;
}

double accuracy(const ConfusionMatrix& c) {
    long long total = c.total();
    if (total == 0)
        throw EmptyMatrix("accuracy of an empty confusion matrix");
    long long diag = 0;
    for (int i = 0; i < c.classes; ++i)
        diag += c.at(i, i);
    return static_cast<double>(diag) / static_cast<double>(total);
}

double sensitivity(const ConfusionMatrix& c, int i) {
    if (i < 0 || i >= c.classes)
        throw IndexOutOfRange("row index");
    long long row = c.row_sum(i);
    if (row == 0)
        throw EmptyRow("sensitivity of an empty row");
    return static_cast<double>(c.at(i, i)) / static_cast<double>(row);
}

double specificity(const ConfusionMatrix& c, int j) {
    if (j < 0 || j >= c.classes)
        throw IndexOutOfRange("column index");
    long long col = c.col_sum(j);
    if (col == 0)
        throw EmptyColumn("specificity of an empty column");
    return static_cast<double>(c.at(j, j)) / static_cast<double>(col);
}

double conventional_specificity(const ConfusionMatrix& c, int j) {
    if (j < 0 || j >= c.classes)
        throw IndexOutOfRange("column index");
    long long total = c.total();
    long long negatives = total - c.row_sum(j); // TN + FP
    if (negatives == 0)
        throw EmptyColumn("no negatives for this class");
    long long tn = negatives - (c.col_sum(j) - c.at(j, j));
    return static_cast<double>(tn) / static_cast<double>(negatives);
}

double psnr(const Image& a, const Image& b, double peak) {
    if (!a.same_dims(b))
        throw DimensionMismatch("psnr needs equal dimensions");
    double mse = 0.0;
    for (size_t i = 0; i < a.samples.size(); ++i) {
        double d = static_cast<double>(a.samples[i]) - b.samples[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.samples.size());
    if (mse == 0.0)
        return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(peak * peak / mse);
}

double ssim(const Image& a, const Image& b) {
    if (!a.same_dims(b))
        throw DimensionMismatch("ssim needs equal dimensions");
    constexpr int kWin = 11;
    if (a.width < kWin || a.height < kWin)
        throw TooSmall("ssim needs at least 11x11");

    const Plane la = to_luminance(a);
    const Plane lb = to_luminance(b);
    const int w = a.width, h = a.height;

    // normalized 11-tap Gaussian, sigma 1.5
    double g[kWin];
    double gsum = 0.0;
    for (int i = 0; i < kWin; ++i) {
        double d = i - (kWin - 1) / 2.0;
        g[i] = std::exp(-0.5 * d * d / (1.5 * 1.5));
        gsum += g[i];
    }
    for (double& v : g)
        v /= gsum;

    constexpr double c1 = 0.01 * 0.01;
    constexpr double c2 = 0.03 * 0.03;

    const int out_h = h - kWin + 1, out_w = w - kWin + 1;
    std::vector<double> row_totals(out_h, 0.0);
    #pragma omp parallel for schedule(static)
    for (int y = 0; y < out_h; ++y) {
        double row_acc = 0.0;
        for (int x = 0; x < out_w; ++x) {
            double mx = 0.0, my = 0.0, xx = 0.0, yy = 0.0, xy = 0.0;
            for (int j = 0; j < kWin; ++j) {
                double wy = g[j];
                for (int i = 0; i < kWin; ++i) {
                    double wgt = wy * g[i];
                    double va = la.at(x + i, y + j);
                    double vb = lb.at(x + i, y + j);
                    mx += wgt * va;
                    my += wgt * vb;
                    xx += wgt * va * va;
                    yy += wgt * vb * vb;
                    xy += wgt * va * vb;
                }
            }
            double var_x = xx - mx * mx;
            double var_y = yy - my * my;
            double cov = xy - mx * my;
            double s = ((2.0 * mx * my + c1) * (2.0 * cov + c2)) /
                       ((mx * mx + my * my + c1) * (var_x + var_y + c2));
            row_acc += s;
        }
        row_totals[y] = row_acc;
    }
    double total = 0.0;
    for (double v : row_totals) // fixed-order reduction
        total += v;
    return total / (static_cast<double>(out_h) * out_w);
}

double efficiency(double accuracy_value, double elapsed_seconds) {
    if (!(elapsed_seconds > 0.0))
        throw NonPositiveTime("elapsed time must be positive");
    return accuracy_value / elapsed_seconds;
}

} // namespace adir
