// Minimal library walkthrough: train AdAct on the sine task with one hidden
// unit and 20 hinges, then compare against MOLF with ten fixed-ReLU units.

#include <cstdio>

#include "adact/adact.hpp"

int main() {
    adact::SinePair data = adact::gen_sine(5000, 100, /*seed=*/7);
    adact::standardize(data.train, &data.test);

    adact::TrainConfig adact_cfg;
    adact_cfg.trainer = adact::TrainerKind::AdAct;
    adact_cfg.hidden_units = 1;
    adact_cfg.hinges = 20;
    adact_cfg.iterations = 100;
    adact_cfg.init_activation = adact::Reference::Sigmoid;
    adact_cfg.seed = 1;

    adact::TrainConfig molf_cfg = adact_cfg;
    molf_cfg.trainer = adact::TrainerKind::Molf;
    molf_cfg.hidden_units = 10;
    molf_cfg.init_activation = adact::Reference::Relu;

    for (const adact::TrainConfig& cfg : {adact_cfg, molf_cfg}) {
        const adact::TrainOutcome out =
            adact::train(cfg, data.train.X, data.train.T, &data.test.X, &data.test.T);
        const adact::IterationRecord& last = out.run.records.back();
        std::printf("%-6s N_h=%-3zu H=%-3zu  train_mse=%.6f  test_mse=%.6f\n",
                    adact::trainer_name(cfg.trainer), cfg.hidden_units, cfg.hinges,
                    last.train_mse, last.val_mse);
    }
    return 0;
}
