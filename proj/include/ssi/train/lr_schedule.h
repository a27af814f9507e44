#pragma once

namespace ssi::train {

// Halves the learning rate once the validation loss has failed to improve on
// the best value so far (val >= best) for `patience` consecutive epochs; the
// counter then restarts.
class PlateauHalving {
 public:
  PlateauHalving(double lr0, int patience);

  // Records one epoch's validation loss. Returns true if the rate was halved.
  bool Step(double val_loss);

  double lr() const { return lr_; }
  double best() const { return best_; }
  int bad_epochs() const { return bad_epochs_; }
  int halvings() const { return halvings_; }
  void Restore(double lr, double best, int bad_epochs, int halvings);

 private:
  double lr_;
  int patience_;
  double best_;
  int bad_epochs_ = 0;
  int halvings_ = 0;
};

}  // namespace ssi::train
