from itertools import product

from django.test import SimpleTestCase
import numpy

from slicemux.exceptions import InvalidParams, PreconditionViolated
from slicemux.scheduler import (Scheme, allocate_slot, knapsack,
                                residual_allocate, update_deficits)
from slicemux.trial import ProvisionPlan


def plan(w_h, w_c, p_h=0.9):
    return ProvisionPlan(names=tuple(f's{i}' for i in range(len(w_h))),
                         w_h=tuple(w_h), p_h=(p_h,) * len(w_h), w_c=w_c)


class SchemeTests(SimpleTestCase):
    def test_parse(self):
        self.assertEqual(Scheme.parse('NoSh'), Scheme('NoSh'))
        self.assertEqual(Scheme.parse('ShT100'), Scheme('ShT', 100))
        self.assertEqual(Scheme.parse('ShT', default_n=50), Scheme('ShT', 50))
        self.assertEqual(str(Scheme('ShT', 7)), 'ShT7')
        for bad in ('Foo', 'ShT', 'ShTx', 'sh'):
            with self.assertRaises(InvalidParams):
                Scheme.parse(bad)

    def test_capacity(self):
        p = plan((4, 5), 7)
        self.assertEqual(Scheme('NoSh').capacity(p), 9)
        self.assertEqual(Scheme('Sh').capacity(p), 7)
        self.assertEqual(Scheme('ShT', 10).capacity(p), 7)


class DeficitTests(SimpleTestCase):
    def test_examples(self):
        d = update_deficits([0.9, 0.9, 0.3], [1, 0, 1], [0.9, 0.9, 0.9])
        self.assertTrue(numpy.allclose(d, [0.9, 1.8, 0.9]))


class KnapsackTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(knapsack([3, 2, 1], [5, 5, 5], 10).tolist(),
                         [True, True, False])
        self.assertEqual(knapsack([1, 1], [4, 4], 4).tolist(), [True, False])
        self.assertTrue(knapsack([2, 7, 1], [3, 4, 5], 12).all())

    def test_deficits_not_demand_weighted(self):
        # one large demand does not outweigh a larger deficit
        self.assertEqual(knapsack([2.0, 1.5], [2, 8], 8).tolist(),
                         [True, False])
        self.assertEqual(knapsack([1.0, 1.0, 1.5], [3, 3, 6], 6).tolist(),
                         [True, True, False])

    def test_larger_load_breaks_value_ties(self):
        # {0} and {1, 2} both have value 2, the latter uses more bandwidth
        self.assertEqual(knapsack([2, 1, 1], [4, 2, 3], 5).tolist(),
                         [False, True, True])

    def test_smallest_index_set_breaks_remaining_ties(self):
        self.assertEqual(knapsack([1, 1, 1], [3, 3, 3], 7).tolist(),
                         [True, True, False])
        self.assertEqual(knapsack([1, 1, 2], [2, 2, 4], 4).tolist(),
                         [True, True, False])
        self.assertEqual(knapsack([2, 1, 1], [4, 2, 2], 4).tolist(),
                         [True, False, False])

    def test_zero_capacity(self):
        self.assertFalse(knapsack([1, 1], [1, 2], 0).any())
        self.assertEqual(len(knapsack([], [], 3)), 0)

    def test_brute_force(self):
        rng = numpy.random.default_rng(0)
        subsets = {}
        for _ in range(1000):
            size = int(rng.integers(1, 13))
            if size not in subsets:
                subsets[size] = numpy.array(
                    list(product([0, 1], repeat=size)), dtype=bool
                )
            u = subsets[size]
            # coarse weights make co-optimal selections common
            weights = rng.integers(1, 6, size) / 2
            demands = rng.integers(1, 51, size)
            cap = int(rng.integers(0, 201))

            loads = u.astype(int) @ demands
            values = u.astype(float) @ weights
            feasible = loads <= cap
            best = values[feasible].max()
            tied = feasible & (numpy.abs(values - best) <= 1e-9)
            most = loads[tied].max()
            expected = min(
                tuple(numpy.flatnonzero(row).tolist())
                for row in u[tied & (loads == most)]
            )

            got = knapsack(weights, demands, cap)
            self.assertLessEqual(demands[got].sum(), cap)
            self.assertAlmostEqual(weights[got].sum(), best)
            self.assertEqual(tuple(numpy.flatnonzero(got).tolist()),
                             expected, (weights, demands, cap))


class ResidualTests(SimpleTestCase):
    def test_examples(self):
        self.assertEqual(residual_allocate({0: 4, 1: 6}, 3), {0: 3.0, 1: 0.0})
        self.assertEqual(residual_allocate({0: 4, 1: 6}, 0), {0: 0.0, 1: 0.0})
        self.assertEqual(residual_allocate({3: 4, 1: 4}, 3), {3: 0.0, 1: 3.0})

    def test_precondition(self):
        with self.assertRaises(PreconditionViolated):
            residual_allocate({0: 4, 1: 6}, 4)
        with self.assertRaises(PreconditionViolated):
            residual_allocate({0: 4}, -1)

    def test_quantized(self):
        grants = residual_allocate({0: 6, 1: 8}, 5, steps={0: 2, 1: 1})
        self.assertEqual(grants, {0: 4.0, 1: 1.0})


class AllocateSlotTests(SimpleTestCase):
    def test_everything_fits(self):
        calls = []
        out = allocate_slot([3, 4], [0, 0], plan((5, 5), 7),
                            Scheme('ShT', 10), lambda: calls.append(1))
        self.assertTrue(out.accepted.all())
        self.assertFalse(out.tested)
        self.assertEqual(calls, [])
        self.assertEqual(out.leftover, 0.0)

    def test_sh_takes_everyone(self):
        out = allocate_slot([6, 5], [1.0, 2.0], plan((6, 5), 10), Scheme('Sh'))
        self.assertEqual(out.set_a, (0, 1))
        # the larger deficit wins
        self.assertEqual(out.accepted.tolist(), [False, True])
        self.assertEqual(out.set_ar, (0,))
        self.assertEqual(out.residual.tolist(), [5.0, 0.0])

    def test_nosh_excludes_above_percentile(self):
        out = allocate_slot([9, 5], [5.0, 0.1], plan((6, 5), 10),
                            Scheme('NoSh'))
        self.assertEqual(out.capacity, 11)
        self.assertEqual(out.set_a, (1,))
        self.assertEqual(out.set_b, (0,))
        self.assertEqual(out.accepted.tolist(), [False, True])
        self.assertEqual(out.residual.tolist(), [6.0, 0.0])

    def test_flagged_slice_goes_last(self):
        out = allocate_slot([6, 5], [9.0, 0.1], plan((6, 5), 10),
                            Scheme('ShT', 10), lambda: [True, False])
        self.assertTrue(out.tested)
        self.assertEqual(out.set_a, (1,))
        self.assertEqual(out.set_b, (0,))
        self.assertEqual(out.accepted.tolist(), [False, True])
        self.assertEqual(out.residual.tolist(), [5.0, 0.0])
        self.assertEqual(out.leftover, 0.0)

    def test_set_ar_blocks_second_round(self):
        # slice 2 is flagged and would fit into the leftover
        out = allocate_slot([6, 6, 1], [1.0, 1.0, 1.0], plan((6, 6, 1), 8),
                            Scheme('ShT', 10), lambda: [False, False, True])
        self.assertEqual(out.accepted.tolist(), [True, False, False])
        self.assertEqual(out.set_ar, (1,))
        self.assertEqual(out.residual.tolist(), [0.0, 2.0, 0.0])

    def test_zero_demand_accepted(self):
        out = allocate_slot([0, 9, 9], [0, 1, 2], plan((1, 9, 9), 10),
                            Scheme('Sh'))
        self.assertEqual(out.accepted.tolist(), [True, False, True])

    def test_quantized_grants(self):
        out = allocate_slot([6, 7], [1.0, 2.0], plan((6, 7), 10),
                            Scheme('Sh'), steps={0: 2, 1: 1})
        self.assertEqual(out.accepted.tolist(), [False, True])
        self.assertEqual(out.residual.tolist(), [2.0, 0.0])

    def test_shT_needs_detector(self):
        with self.assertRaises(InvalidParams):
            allocate_slot([6, 6], [1, 1], plan((6, 6), 10), Scheme('ShT', 5))

    def test_never_over_capacity(self):
        rng = numpy.random.default_rng(1)
        p = plan((8, 8, 8), 15)
        deficits = numpy.asarray(p.p_h)
        for _ in range(500):
            demands = rng.integers(0, 14, 3)
            flags = rng.random(3) < 0.3
            out = allocate_slot(demands, deficits, p, Scheme('ShT', 5),
                                lambda: flags.tolist())
            used = (demands * out.accepted).sum() + out.residual.sum()
            self.assertLessEqual(used, 15 + 1e-9)
            deficits = update_deficits(deficits, out.accepted, p.p_h)
