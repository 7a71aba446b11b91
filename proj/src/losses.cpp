#include "s2cgan/losses.hpp"

namespace s2cgan {

double loss_l1(const Raster& target, const Raster& reconstruction) {
  if (!target.same_shape(reconstruction)) {
    throw Error(ErrorCode::kShapeMismatch, "L1 operands differ in shape");
  }
  return loss_l1<float>(target.values(), reconstruction.values());
}

double loss_cgan_d(const ScoreRaster& d_real, const ScoreRaster& d_fake) {
  return loss_cgan_d<float>(d_real.values, d_fake.values);
}

double loss_g(const ScoreRaster& d_fake, const Raster& target, const Raster& reconstruction,
              double lambda_l1) {
  if (!target.same_shape(reconstruction)) {
    throw Error(ErrorCode::kShapeMismatch, "L1 operands differ in shape");
  }
  return loss_g<float>(d_fake.values, target.values(), reconstruction.values(), lambda_l1);
}

}  // namespace s2cgan
