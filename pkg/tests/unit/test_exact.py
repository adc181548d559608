"""
Tests for branch and bound
"""

import io

import numpy as np
import pytest

from subcut.errors import LpError
from subcut.exact import branch_and_bound
from subcut.generators.indepset import generate_max_indep_set
from subcut.milp import MilpInstance, enumerate_feasible
from subcut.types import BnbStatus
from tests.instances import random_tiny_instance, worked_instance


def _one_variable(A, b, c) -> MilpInstance:
    return MilpInstance(
        name="one", A=A, G=np.zeros((len(b), 0)), b=b, c=c, h=np.zeros(0)
    )


class TestBranchAndBound:
    """Test exact optima on hand-checkable instances"""

    def test_worked_instance(self):
        """Test the worked optimum is -1 at an integral point"""
        instance = worked_instance()
        result = branch_and_bound(instance)
        assert result.is_optimal
        assert result.optimum == pytest.approx(-1.0)
        x, _ = result.incumbent
        assert np.array_equal(x, np.round(x))
        assert instance.is_feasible(x)
        assert result.lower_bound == pytest.approx(-1.0)

    def test_integral_root(self):
        """Test an integral root LP needs a single node"""
        result = branch_and_bound(_one_variable([[1.0]], [1.0], [1.0]))
        assert result.is_optimal
        assert result.optimum == pytest.approx(1.0)
        assert result.nodes == 1

    def test_triangle_independent_set(self):
        """Test the triangle's LP bound -1.5 closes to -1"""
        instance = generate_max_indep_set(3, 1.0, seed=0)
        result = branch_and_bound(instance)
        assert result.optimum == pytest.approx(-1.0)
        assert result.incumbent[0].sum() == pytest.approx(1.0)

    def test_node_limit(self):
        """Test a budget of one node reports the open bound"""
        result = branch_and_bound(worked_instance(), node_limit=1)
        assert result.status == BnbStatus.NODE_LIMIT
        assert result.nodes == 1
        assert result.incumbent is None
        assert result.optimum is None
        assert result.lower_bound == pytest.approx(-1.5)

    def test_infeasible_root(self):
        """Test x >= 1 together with x <= 0"""
        result = branch_and_bound(_one_variable([[1.0], [-1.0]], [1.0, 0.0], [1.0]))
        assert result.status == BnbStatus.INFEASIBLE
        assert result.nodes == 1
        assert result.optimum is None

    def test_integer_infeasible(self):
        """Test 2x = 1 has an LP point but no integer point"""
        result = branch_and_bound(_one_variable([[2.0], [-2.0]], [1.0, -1.0], [1.0]))
        assert result.status == BnbStatus.INFEASIBLE
        assert result.incumbent is None

    def test_unbounded_root(self):
        """Test an unbounded relaxation is an error"""
        with pytest.raises(LpError):
            branch_and_bound(_one_variable([[1.0]], [0.0], [-1.0]))

    def test_invalid_node_limit(self):
        """Test the node budget must be positive"""
        with pytest.raises(ValueError):
            branch_and_bound(worked_instance(), node_limit=0)

    def test_node_log(self):
        """Test one log line per expanded node"""
        stream = io.StringIO()
        result = branch_and_bound(worked_instance(), node_log=stream)
        lines = stream.getvalue().splitlines()
        assert len(lines) == result.nodes
        assert lines[0].startswith("node 1 depth 0 bound -1.5 branch x")

    def test_matches_enumeration(self):
        """Test B&B agrees with enumeration on random tiny instances"""
        rng = np.random.default_rng(7)
        for index in range(20):
            instance = random_tiny_instance(rng, f"tiny-{index}")
            expected = enumerate_feasible(instance, 3).best_objective(instance)
            result = branch_and_bound(instance)
            assert result.is_optimal
            assert result.optimum == pytest.approx(expected, abs=1e-6)
