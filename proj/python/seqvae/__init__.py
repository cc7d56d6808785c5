# Copyright 2026 The seqvae Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Variational autoencoders for sequential recommendation."""

from ._core import (
    ConfigError,
    ContractError,
    IoError,
    ItemLookupError,
    Model,
    evaluate,
    evaluate_popularity,
    kl_gaussian_standard,
    ndcg_at_n,
    next_k_targets,
    precision_at_n,
    recall_at_n,
    run_cli,
    synthetic_cyclic,
    train,
)

__all__ = [
    "ConfigError",
    "ContractError",
    "IoError",
    "ItemLookupError",
    "Model",
    "evaluate",
    "evaluate_popularity",
    "kl_gaussian_standard",
    "ndcg_at_n",
    "next_k_targets",
    "precision_at_n",
    "recall_at_n",
    "run_cli",
    "synthetic_cyclic",
    "train",
]
