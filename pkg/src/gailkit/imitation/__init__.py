from gailkit.imitation.apprenticeship import (
    ApprenticeshipConfig,
    QuadraticFeatures,
    apprenticeship_train,
)
from gailkit.imitation.bc import BcConfig, BcResult, behavioral_cloning
from gailkit.imitation.dataset import ExpertDataset, Trajectory, load_jsonl, save_jsonl
from gailkit.imitation.discriminator import (
    Discriminator,
    DiscriminatorState,
    discriminator_update,
    make_discriminator_state,
)
from gailkit.imitation.gail import GailConfig, TrainResult, gail_train
from gailkit.imitation.tabular import TabularGailResult, tabular_gail_oracle
