"""
Tests for the abstract InstanceGenerator base class and its interface contract.
"""

import inspect
from abc import ABC

import numpy as np
import pytest

from subcut.errors import GeneratorError
from subcut.generators.base import InstanceGenerator
from subcut.milp import MilpInstance


class CountingGenerator(InstanceGenerator):
    """min x s.t. x >= size, for checking parameter handling"""

    @property
    def name(self):
        return "counting"

    @property
    def parameters(self):
        return {"size": 1, "scale": 2.0}

    def build(self, seed, **params):
        return MilpInstance(
            name=f"counting-{params['size']}-{params['scale']:g}-s{seed}",
            A=[[1.0]],
            G=np.zeros((1, 0)),
            b=[float(params["size"])],
            c=[params["scale"]],
            h=np.zeros(0),
        )


class TestInstanceGeneratorAbstractInterface:
    """Test the abstract interface definition of InstanceGenerator"""

    def test_is_abstract_base_class(self):
        """Test that InstanceGenerator is properly defined as an ABC"""
        assert issubclass(InstanceGenerator, ABC)
        assert InstanceGenerator.__abstractmethods__ == {"name", "parameters", "build"}

    def test_cannot_instantiate_abstract_class(self):
        """Test that the abstract base class cannot be instantiated"""
        with pytest.raises(TypeError, match="abstract"):
            InstanceGenerator()

    def test_abstract_method_signatures(self):
        """Test that abstract members have the expected shapes"""
        assert isinstance(InstanceGenerator.name, property)
        assert isinstance(InstanceGenerator.parameters, property)
        build_sig = inspect.signature(InstanceGenerator.build)
        assert list(build_sig.parameters.keys()) == ["self", "seed", "params"]

    def test_incomplete_implementation_fails(self):
        """Test that partial implementations cannot be instantiated"""

        class PartialGenerator(InstanceGenerator):
            @property
            def name(self):
                return "partial"

        with pytest.raises(TypeError):
            PartialGenerator()


class TestGenerate:
    """Test the concrete generate and describe methods"""

    def test_defaults_are_filled_in(self):
        """Test missing parameters take their defaults"""
        instance = CountingGenerator().generate(3)
        assert instance.name == "counting-1-2-s3"

    def test_overrides(self):
        """Test given parameters replace defaults"""
        instance = CountingGenerator().generate(0, size=4)
        assert instance.b.tolist() == [4.0]
        assert instance.c.tolist() == [2.0]

    def test_unknown_parameter(self):
        """Test unknown parameter names are rejected with the expected list"""
        with pytest.raises(GeneratorError, match="density"):
            CountingGenerator().generate(0, density=0.5)

    def test_describe(self):
        """Test the one-line instance description"""
        generator = CountingGenerator()
        assert generator.describe(generator.generate(0)) == "counting: m=1, n=1, k=1"
