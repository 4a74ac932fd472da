import importlib
import inspect
import pkgutil
import unittest

import ViewingEEG


def library_modules():
    for info in pkgutil.walk_packages(ViewingEEG.__path__, prefix="ViewingEEG."):
        if not info.ispkg:
            yield importlib.import_module(info.name)


class TestPackage(unittest.TestCase):

    def test_modules_open_with_a_docstring(self):
        modules = list(library_modules())
        self.assertGreaterEqual(len(modules), 14)
        for module in modules:
            source = inspect.getsource(module)
            self.assertTrue(source.startswith('"""'), module.__name__)
            self.assertTrue(module.__doc__ and module.__doc__.strip(), module.__name__)

    def test_version_and_public_names(self):
        self.assertTrue(ViewingEEG.__version__)
        for name in ViewingEEG.__all__:
            self.assertTrue(hasattr(ViewingEEG, name), name)


if __name__ == '__main__':
    unittest.main()
