from __future__ import annotations

import unittest
from unittest import TestCase

from qc_outliers.arguments import (ArgumentSyntaxError, parse_assignments, parse_bounds, parse_numbers,
                                   parse_resolution)


class TestArguments(TestCase):
    def test_assignments(self):
        self.assertEqual(parse_assignments("n_blob=300, spread=1.5"), {'n_blob': 300, 'spread': 1.5})
        self.assertEqual(parse_assignments("mode=inverse"), {'mode': 'inverse'})
        self.assertEqual(parse_assignments("offset=-2.5,"), {'offset': -2.5})
        self.assertEqual(parse_assignments(""), {})
        self.assertIsInstance(parse_assignments("n=3")['n'], int)

    def test_assignments_copy(self):
        parse_assignments("a=1")['a'] = 2
        self.assertEqual(parse_assignments("a=1"), {'a': 1})

    def test_duplicate(self):
        with self.assertRaisesRegex(ArgumentSyntaxError, "twice"):
            parse_assignments("a=1, a=2")

    def test_bounds(self):
        self.assertEqual(parse_bounds("-5:5, -4:4.5"), ((-5.0, 5.0), (-4.0, 4.5)))

    def test_resolution(self):
        self.assertEqual(parse_resolution("60, 40"), (60, 40))

    def test_numbers(self):
        self.assertEqual(parse_numbers("1, 0.5, 3e-1"), (1.0, 0.5, 0.3))

    def test_syntax_errors(self):
        for parse, text in ((parse_assignments, "n_blob"), (parse_assignments, "=3"), (parse_bounds, "1-2"),
                            (parse_resolution, "1.5, 2"), (parse_numbers, "one, two"), (parse_numbers, "")):
            with self.subTest(text=text):
                with self.assertRaises(ArgumentSyntaxError):
                    parse(text)
        self.assertTrue(issubclass(ArgumentSyntaxError, ValueError))


if __name__ == '__main__':
    unittest.main()
