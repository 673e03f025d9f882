"""Cartpole and mountain car from their published dynamics equations.

Cartpole (Barto, Sutton & Anderson 1983), Euler integration:
    gravity 9.8, cart mass 1.0, pole mass 0.1, pole half-length 0.5,
    force magnitude 10.0, time step 0.02 s.
    Start state uniform in [-0.05, 0.05]^4. Terminates when |x| > 2.4 or
    |theta| > 12 degrees. Every step, including the terminating one, costs -1.

Mountain car (Moore 1990):
    v += (a - 1) * 0.001 - 0.0025 cos(3 x), v clipped to [-0.07, 0.07];
    x += v, x clipped to [-1.2, 0.6]; v reset to 0 on hitting the left wall.
    Start x uniform in [-0.6, -0.4], v = 0. Terminates only when x >= 0.5.
    Every step costs +1. ``MountainCar.energy_potential`` (negative
    mechanical energy) is provided for potential-based shaping of expert
    training; the task cost itself is never changed.

Both tasks are capped at 200 steps.
"""
from __future__ import annotations

import math

import numpy as np

from gailkit.envs.base import BatchDynamics, EnvSpec

HORIZON = 200


class CartPole(BatchDynamics):
    gravity = 9.8
    masscart = 1.0
    masspole = 0.1
    total_mass = masscart + masspole
    length = 0.5
    polemass_length = masspole * length
    force_mag = 10.0
    tau = 0.02
    theta_threshold = 12 * 2 * math.pi / 360
    x_threshold = 2.4

    spec = EnvSpec("cartpole", 4, "discrete", 2, HORIZON)
    # scale used to map observations into roughly [-1, 1]
    obs_scale = np.array([2.4, 3.0, 0.21, 3.5])

    def sample_start(self, rngs):
        return np.stack([rng.uniform(-0.05, 0.05, size=4) for rng in rngs])

    def transition(self, states, actions, rngs):
        x, x_dot, theta, theta_dot = states.T
        force = np.where(actions == 1, self.force_mag, -self.force_mag)
        costheta = np.cos(theta)
        sintheta = np.sin(theta)
        temp = (force + self.polemass_length * theta_dot**2 * sintheta) / self.total_mass
        thetaacc = (self.gravity * sintheta - costheta * temp) / (
            self.length * (4.0 / 3.0 - self.masspole * costheta**2 / self.total_mass)
        )
        xacc = temp - self.polemass_length * thetaacc * costheta / self.total_mass
        x = x + self.tau * x_dot
        x_dot = x_dot + self.tau * xacc
        theta = theta + self.tau * theta_dot
        theta_dot = theta_dot + self.tau * thetaacc
        nxt = np.stack([x, x_dot, theta, theta_dot], axis=1)
        terminal = (np.abs(x) > self.x_threshold) | (np.abs(theta) > self.theta_threshold)
        return nxt, np.full(len(states), -1.0), terminal


class MountainCar(BatchDynamics):
    min_position = -1.2
    max_position = 0.6
    max_speed = 0.07
    goal_position = 0.5
    force = 0.001
    gravity = 0.0025

    spec = EnvSpec("mountaincar", 2, "discrete", 3, HORIZON)
    obs_scale = np.array([0.9, 0.07])
    obs_shift = np.array([-0.3, 0.0])

    def sample_start(self, rngs):
        return np.stack([np.array([rng.uniform(-0.6, -0.4), 0.0]) for rng in rngs])

    def transition(self, states, actions, rngs):
        position, velocity = states.T
        velocity = velocity + (actions - 1) * self.force - np.cos(3 * position) * self.gravity
        velocity = np.clip(velocity, -self.max_speed, self.max_speed)
        position = np.clip(position + velocity, self.min_position, self.max_position)
        velocity = np.where((position == self.min_position) & (velocity < 0), 0.0, velocity)
        terminal = position >= self.goal_position
        return np.stack([position, velocity], axis=1), np.ones(len(states)), terminal

    @classmethod
    def energy_potential(cls, obs, scale=3000.0):
        """Negative mechanical energy, a shaping potential for expert training."""
        obs = np.atleast_2d(obs)
        height = np.sin(3 * obs[:, 0]) * cls.gravity / 3
        return -scale * (height + 0.5 * obs[:, 1] ** 2)
