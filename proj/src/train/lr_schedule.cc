#include "ssi/train/lr_schedule.h"

#include <cmath>
#include <limits>

#include "ssi/common/error.h"

namespace ssi::train {

PlateauHalving::PlateauHalving(double lr0, int patience)
    : lr_(lr0), patience_(patience), best_(std::numeric_limits<double>::infinity()) {
  Require(lr0 > 0.0, "initial learning rate must be positive");
  Require(patience >= 1, "patience must be at least 1");
}

bool PlateauHalving::Step(double val_loss) {
  if (!std::isfinite(val_loss)) throw NumericalError("validation loss is not finite");
  if (val_loss < best_) {
    best_ = val_loss;
    bad_epochs_ = 0;
    return false;
  }
  if (++bad_epochs_ < patience_) return false;
  lr_ *= 0.5;
  bad_epochs_ = 0;
  ++halvings_;
  return true;
}

void PlateauHalving::Restore(double lr, double best, int bad_epochs, int halvings) {
  lr_ = lr;
  best_ = best;
  bad_epochs_ = bad_epochs;
  halvings_ = halvings;
}

}  // namespace ssi::train
