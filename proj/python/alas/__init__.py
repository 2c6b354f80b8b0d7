# Copyright 2025 The ALAS Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Disruption-aware scheduling and workflow reliability engine.

The native module speaks JSON text; this package decodes everything into
plain dicts and lists.
"""

import json as _json

try:  # wheel layout: the extension lives inside the package
    from . import _alas
except ImportError:  # in-tree build layout: extension on PYTHONPATH
    import _alas

AlasError = _alas.AlasError
__version__ = _alas.__version__
compute_backoff = _alas.compute_backoff
emit_argo = _alas.emit_argo
emit_asl = _alas.emit_asl


def _loads(text):
    return _json.loads(text)


def seed_plan(instance, rule="spt", seed=1):
    return _loads(_alas.seed_plan(instance, rule, seed))


def makespan(schedule):
    return _alas.makespan(_json.dumps(schedule))


def validate(schedule, instance):
    return _loads(_alas.validate(_json.dumps(schedule), instance))


def repair(schedule, instance, budget=5):
    return _loads(_alas.repair(_json.dumps(schedule), instance, budget))


def optimize(schedule, instance):
    return _loads(_alas.optimize(_json.dumps(schedule), instance))


def brute_force_optimum(instance):
    return _loads(_alas.brute_force_optimum(instance))


def local_compensate(schedule, instance, event, wip_penalty=1.0):
    return _loads(
        _alas.local_compensate(
            _json.dumps(schedule), instance, _json.dumps(event), wip_penalty
        )
    )


def queue_reorder(schedule, committed, instance, event, wip_penalty=1.0):
    return _loads(
        _alas.queue_reorder(
            _json.dumps(schedule),
            _json.dumps(committed),
            instance,
            _json.dumps(event),
            wip_penalty,
        )
    )


def run(config):
    return _loads(_alas.run(_json.dumps(config)))


def parse_ir(text):
    return _loads(_alas.parse_ir(text))


def check_well_formed(text):
    return _loads(_alas.check_well_formed(text))


def check_policies(text):
    return _loads(_alas.check_policies(text))


def ingest_asl(text):
    return _loads(_alas.ingest_asl(text))


def ingest_argo(text):
    return _loads(_alas.ingest_argo(text))


def roundtrip_check(ir_text, target):
    return _loads(_alas.roundtrip_check(ir_text, target))


def replay_file(path, seed):
    return _loads(_alas.replay_file(path, seed))
