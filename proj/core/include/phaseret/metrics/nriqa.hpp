#pragma once

#include <array>
#include <iosfwd>
#include <vector>

#include "phaseret/image.hpp"

namespace phaseret::metrics {

/// Natural-scene-statistics feature vector: per scale (2 scales) the GGD
/// shape/variance of the MSCN coefficients plus AGGD (shape, mean, left
/// variance, right variance) for the 4 orientation products.
struct NSSFeatures {
  std::array<double, 36> v{};
  bool degenerate = false;  // set for (near-)constant inputs
};

/// Multivariate Gaussian model of pristine patch features.
struct MVGModel {
  int dim = 36;
  std::vector<double> mean;  // dim
  std::vector<double> cov;   // dim x dim, row-major symmetric PSD
};

/// Mean-subtracted contrast-normalized image: (I - mu)/(sigma + 1) with 7x7
/// Gaussian-weighted local moments (sigma_g = 7/6, replicate border).
Image2D mscn(const Image2D& img);

/// 36 spatial NSS features over 2 scales (half scale via 2x2 box average).
/// Requires at least an 8x8 image.
NSSFeatures brisque_features(const Image2D& img);

/// Distance of one feature vector to the pristine statistics (regularized
/// Mahalanobis). Lower is better; constant images get the documented
/// fallback score of 100.
double brisque_score(const NSSFeatures& features, const MVGModel& model);
double brisque_score(const Image2D& img, const MVGModel& model,
                     bool* degenerate = nullptr);

/// Patch-based natural image quality: sharpness-selected patches, per-patch
/// features, MVG fit, sqrt(d^T ((S1+S2)/2)^+ d) against the pristine model.
double niqe_score(const Image2D& img, const MVGModel& model, int patch = 32,
                  bool* degenerate = nullptr);

/// Mean/covariance of sharpness-selected patch features over a corpus.
MVGModel fit_pristine_model(const std::vector<Image2D>& corpus, int patch = 32);

/// Deterministic bundled reference corpus (natural-statistics textures);
/// the same images are committed under assets/pristine/.
std::vector<Image2D> builtin_pristine_corpus();

/// Model fit from the builtin corpus, cached for the process lifetime.
const MVGModel& default_pristine_model();

void save_model(const MVGModel& model, std::ostream& os);
MVGModel load_model(std::istream& is);

}  // namespace phaseret::metrics
