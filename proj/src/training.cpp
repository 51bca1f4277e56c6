#include "invlint/training.hpp"

namespace invlint {

void TrainConfig::validate() const {
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0))
        throw ConfigError("beta1 and beta2 must lie in [0, 1)");
    if (!(lr_min > 0.0) || !(lr_max >= lr_min)) throw ConfigError("need lr_max >= lr_min > 0");
    if (!(eps > 0.0)) throw ConfigError("eps must be positive");
    if (weight_decay < 0.0) throw ConfigError("weight_decay must be non-negative");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (epochs < 0) throw ConfigError("epochs must be >= 0");
    if (T0 < 1 || T_mult < 1) throw ConfigError("need T0 >= 1 and T_mult >= 1");
}

double cosine_restart_lr(int epoch, int T0, int T_mult, double lr_max, double lr_min) {
    if (epoch < 0) throw ConfigError("epoch must be >= 0");
    if (T0 < 1 || T_mult < 1) throw ConfigError("need T0 >= 1 and T_mult >= 1");
    long long cur = epoch;
    long long len = T0;
    while (cur >= len) {
        cur -= len;
        len *= T_mult;
    }
    return lr_min + 0.5 * (lr_max - lr_min) * (1.0 + std::cos(std::numbers::pi * static_cast<double>(cur) / static_cast<double>(len)));
}

} // namespace invlint
