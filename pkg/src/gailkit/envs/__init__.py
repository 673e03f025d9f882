from gailkit.envs.base import BatchDynamics, Env, EnvSpec, EpisodeFinishedError
from gailkit.envs.classic import CartPole, MountainCar
from gailkit.envs.gridworld import Gridworld, GridworldConfig, tabularize
from gailkit.envs.tabular import TabularDynamics

ENV_NAMES = ("cartpole", "mountaincar", "gridworld")


def make_dynamics(name: str, **config) -> BatchDynamics:
    key = name.lower().replace("_", "").replace("-", "")
    if key == "cartpole":
        return CartPole()
    if key == "mountaincar":
        return MountainCar()
    if key.startswith("gridworld"):
        return Gridworld(GridworldConfig(**config))
    raise ValueError(f"unknown environment {name!r}; expected one of {ENV_NAMES}")


def make_env(name: str, **config) -> Env:
    return Env(make_dynamics(name, **config))


__all__ = [
    "BatchDynamics", "CartPole", "Env", "EnvSpec", "EpisodeFinishedError", "Gridworld",
    "GridworldConfig", "MountainCar", "TabularDynamics", "make_dynamics", "make_env", "tabularize",
]
