#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "adir/image.hpp"

namespace adir {

// Rows are the true class, columns the predicted class.
struct ConfusionMatrix {
    int classes = 0;
    std::vector<long long> counts; // classes x classes, row-major

    long long at(int truth, int predicted) const {
        return counts[static_cast<size_t>(truth) * classes + predicted];
    }
    long long& at(int truth, int predicted) {
        return counts[static_cast<size_t>(truth) * classes + predicted];
    }
    long long total() const;
    long long row_sum(int i) const;
    long long col_sum(int j) const;
};

ConfusionMatrix confusion(std::span<const int> truth, std::span<const int> predicted,
                          int classes);

// trace / total
double accuracy(const ConfusionMatrix& c);

// C_ii / row sum: true-positive rate of class i
double sensitivity(const ConfusionMatrix& c, int i);

// C_jj / column sum: the column-normalized diagonal. Note this behaves like
// a predictive value rather than a true-negative rate; see
// conventional_specificity for the textbook definition.
double specificity(const ConfusionMatrix& c, int j);

// TN / (TN + FP) for class j
double conventional_specificity(const ConfusionMatrix& c, int j);

// 10 log10(peak^2 / MSE); returns +infinity when the images are identical.
double psnr(const Image& a, const Image& b, double peak = 1.0);

// mean local SSIM on luminance, 11x11 Gaussian window sigma 1.5,
// C1 = (0.01 peak)^2, C2 = (0.03 peak)^2
double ssim(const Image& a, const Image& b);

// accuracy per second of execution
double efficiency(double accuracy_value, double elapsed_seconds);

} // namespace adir
