import unittest

from knot_mosaic.codec import DecodeReport, decode_mosaic, encode_mosaic
from knot_mosaic.knotlib import load_corpus
from knot_mosaic.mosaic import (
    RULE_BLANK_PLACEMENT,
    RULE_BOUND,
    RULE_CONTINUITY,
    RULE_SINGLE_COMPONENT,
    SIDE_LEFT,
    SIDE_RIGHT,
    STATUS_EMPTY,
    STATUS_INVALID,
    STATUS_VALID,
    AsymmetricLegs,
    Mosaic,
    MosaicShapeError,
    NoSpliceSite,
    NotAKnot,
    NotATangle,
    Region,
    RegionOutOfBounds,
    blank_for_cell,
    bounding_box,
    connect_sum,
    crossing_number,
    find_splice_site,
    mutate,
    mutation_regions,
    pad_to_square,
    validate,
)
from knot_mosaic.tiles import Port, Tile

UNKNOT = Mosaic.from_rows([["m3", "m2"], ["m5", "m8"]])


class CorpusTestCase(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.corpus = load_corpus()

    def knot(self, knot_id):
        return self.corpus.lookup(knot_id).mosaic


class TestMosaicShape(unittest.TestCase):
    def test_ragged_rows_are_rejected(self):
        with self.assertRaises(MosaicShapeError):
            Mosaic.from_rows([["b1", "b1"], ["b1"]])
        with self.assertRaises(MosaicShapeError):
            Mosaic.from_rows([])

    def test_blank_for_cell(self):
        self.assertEqual(blank_for_cell((0, 0), 4), Tile.B4)
        self.assertEqual(blank_for_cell((0, 3), 4), Tile.B1)
        self.assertEqual(blank_for_cell((3, 0), 4), Tile.B3)
        self.assertEqual(blank_for_cell((3, 3), 4), Tile.B2)
        self.assertEqual(blank_for_cell((1, 1), 3), Tile.B4)
        self.assertEqual(blank_for_cell((2, 2), 3), Tile.B2)
        self.assertEqual(blank_for_cell((0, 2), 4, cols=6), Tile.B4)

    def test_pad_to_square(self):
        padded = pad_to_square(Mosaic.blank(2, 3))
        self.assertEqual(padded, Mosaic.blank(3, 3))
        self.assertIs(pad_to_square(UNKNOT), UNKNOT)

    def test_pad_keeps_tiles_top_left(self):
        padded = pad_to_square(Mosaic.from_rows([["m3", "m2", "b1"], ["m5", "m8", "b2"]]))
        self.assertEqual(padded.rows, 3)
        self.assertEqual(padded[(0, 0)], Tile.M3)
        self.assertEqual(padded[(1, 1)], Tile.M8)
        self.assertEqual(padded[(2, 2)], Tile.B2)


class TestValidate(CorpusTestCase):
    def test_lonely_arc_breaks_continuity(self):
        m = Mosaic.blank(3, 3).replace({(1, 1): Tile.M2})
        report = validate(m)
        self.assertEqual(report.status, STATUS_INVALID)
        found = {(v.rule, v.cell, v.port) for v in report.violations}
        self.assertEqual(
            found,
            {
                (RULE_CONTINUITY, (1, 1), Port.SOUTH),
                (RULE_CONTINUITY, (1, 1), Port.WEST),
            },
        )

    def test_all_blank_is_empty(self):
        report = validate(Mosaic.blank(4, 4))
        self.assertEqual(report.status, STATUS_EMPTY)
        self.assertFalse(report.violations)
        self.assertEqual(report.crossing_count, 0)

    def test_unknot(self):
        report = validate(UNKNOT)
        self.assertEqual(report.status, STATUS_VALID)
        self.assertEqual(report.component_count, 1)
        self.assertEqual(report.crossing_count, 0)

    def test_two_loops_are_a_link(self):
        report = validate(Mosaic.from_rows([["m3", "m2", "m3", "m2"], ["m5", "m8", "m5", "m8"]]))
        self.assertEqual(report.status, STATUS_INVALID)
        self.assertEqual(report.component_count, 2)
        self.assertIn(RULE_SINGLE_COMPONENT, report.rules_violated())

    def test_misplaced_blank(self):
        m = self.knot("3_1").replace({(0, 0): Tile.B1})
        report = validate(m)
        self.assertEqual(report.status, STATUS_INVALID)
        found = [(v.rule, v.cell) for v in report.violations]
        self.assertEqual(found, [(RULE_BLANK_PLACEMENT, (0, 0))])

    def test_size_bound_only_warns(self):
        m = Mosaic.blank(6, 6).replace(
            {(2, 2): Tile.M3, (2, 3): Tile.M2, (3, 2): Tile.M5, (3, 3): Tile.M8}
        )
        report = validate(m, claimed_crossings=1)
        self.assertEqual(report.status, STATUS_VALID)
        self.assertEqual([w.rule for w in report.warnings], [RULE_BOUND])

    def test_corpus_entries_are_valid(self):
        for entry in self.corpus:
            report = validate(entry.mosaic)
            self.assertEqual(report.status, STATUS_VALID, entry.id)
            self.assertEqual(report.crossing_count, entry.chi, entry.id)
            self.assertEqual(report.to_dict()["status"], STATUS_VALID)

    def test_every_single_flip_of_a_corpus_knot_is_caught(self):
        for entry in self.corpus:
            m = pad_to_square(entry.mosaic)
            bits = encode_mosaic(m)
            for position in range(len(bits)):
                decoded = decode_mosaic(bits.flip(position), m.rows)
                if isinstance(decoded, DecodeReport):
                    continue
                self.assertNotEqual(
                    validate(decoded).status, STATUS_VALID, f"{entry.id} bit {position}"
                )


class TestConnectSum(CorpusTestCase):
    def test_bounding_box(self):
        self.assertEqual(bounding_box(self.knot("granny")), (0, 0, 3, 5))
        self.assertIsNone(bounding_box(Mosaic.blank(2, 2)))

    def test_splice_sites(self):
        trefoil = self.knot("3_1")
        self.assertEqual(find_splice_site(trefoil, SIDE_RIGHT).rows, (1, 2))
        self.assertEqual(find_splice_site(trefoil, SIDE_LEFT).column, 0)
        with self.assertRaises(NoSpliceSite):
            find_splice_site(Mosaic.blank(3, 3), SIDE_LEFT)
        with self.assertRaises(ValueError):
            find_splice_site(trefoil, "top")

    def test_crossing_numbers_add(self):
        for left in self.corpus.ids():
            for right in self.corpus.ids():
                result = connect_sum(self.knot(left), self.knot(right))
                self.assertEqual(validate(result).status, STATUS_VALID, (left, right))
                self.assertEqual(
                    crossing_number(result),
                    self.corpus.lookup(left).chi + self.corpus.lookup(right).chi,
                )

    def test_trefoil_and_mirror_give_the_granny(self):
        result = connect_sum(self.knot("3_1"), self.knot("3_1m"))
        self.assertEqual((result.rows, result.cols), (4, 6))
        self.assertEqual(pad_to_square(result), self.knot("granny"))

    def test_unknot_is_a_unit(self):
        result = connect_sum(self.knot("3_1"), UNKNOT)
        self.assertEqual(crossing_number(result), 3)
        self.assertEqual(validate(result).status, STATUS_VALID)

    def test_invalid_summand(self):
        with self.assertRaises(NotAKnot):
            connect_sum(Mosaic.blank(4, 4), self.knot("3_1"))


class TestMutate(CorpusTestCase):
    def test_granny_mutation(self):
        region = Region(0, 1, 4, 2)
        result = mutate(self.knot("granny"), region)
        self.assertEqual(
            [row[1:3] for row in result.tokens()[:4]],
            [["m3", "m2"], ["m1", "m4"], ["m4", "m6"], ["m5", "m8"]],
        )
        report = validate(result)
        self.assertEqual(report.status, STATUS_VALID)
        self.assertEqual(report.crossing_count, 6)

    def test_mutation_is_an_involution(self):
        granny = self.knot("granny")
        region = Region(0, 1, 4, 2)
        self.assertEqual(mutate(mutate(granny, region), region), granny)

    def test_corpus_regions_mutate_to_knots(self):
        checked = 0
        for entry in self.corpus:
            for region in mutation_regions(entry.mosaic):
                result = mutate(entry.mosaic, region)
                report = validate(result)
                self.assertEqual(report.status, STATUS_VALID, (entry.id, str(region)))
                self.assertEqual(report.crossing_count, entry.chi)
                self.assertEqual(report.component_count, 1)
                self.assertEqual(mutate(result, region), entry.mosaic)
                checked += 1
        self.assertGreaterEqual(checked, 20)

    def test_granny_region_is_listed(self):
        self.assertIn(Region(0, 1, 4, 2), mutation_regions(self.knot("granny")))

    def test_rejected_regions(self):
        trefoil = self.knot("3_1")
        with self.assertRaises(NotATangle):
            mutate(trefoil, Region(0, 0, 1, 1))
        with self.assertRaises(AsymmetricLegs):
            mutate(trefoil, Region(0, 1, 2, 2))
        with self.assertRaises(RegionOutOfBounds):
            mutate(trefoil, Region(3, 3, 2, 2))
        with self.assertRaises(NotAKnot):
            mutate(Mosaic.blank(4, 4), Region(0, 0, 2, 2))

    def test_region_text(self):
        self.assertEqual(Region.parse("0, 1, 4, 2"), Region(0, 1, 4, 2))
        self.assertEqual(str(Region(0, 1, 4, 2)), "0,1,4,2")
        with self.assertRaises(ValueError):
            Region.parse("0,1,4")
        with self.assertRaises(ValueError):
            Region.parse("a,b,c,d")


if __name__ == "__main__":
    unittest.main()
