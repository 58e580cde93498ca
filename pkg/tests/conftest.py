import itertools

import pytest

from specmine.events import ActionDescriptor, EventLabel, PuritySet, Trace
from specmine.subjects import CONSTRUCTOR, Subject, SubjectException


def all_traces(alphabet, max_len):
    """Every END-terminated trace over the alphabet up to the body length."""
    traces = []
    for length in range(max_len + 1):
        for combo in itertools.product(alphabet, repeat=length):
            traces.append(Trace(tuple(combo)).completed())
    return traces


@pytest.fixture(scope="session")
def tiny_alphabet():
    """Three letters, one of them pure."""
    return [EventLabel("a"), EventLabel("b"), EventLabel("p")]


@pytest.fixture(scope="session")
def tiny_purity():
    return PuritySet({"p"})


class _DataStore:
    """Set-like container used by the search walkthrough tests.

    getAll is intentionally impure (it compacts internal storage), which is
    what makes the immediate-follow goal on clear falsifiable.
    """

    def __init__(self):
        self.items = set()

    def add(self, item):
        if item in self.items:
            return False
        self.items.add(item)
        return True

    def addAll(self, items):
        added = False
        for item in items:
            if item not in self.items:
                self.items.add(item)
                added = True
        return added

    def isEmpty(self):
        return not self.items

    def clear(self):
        self.items.clear()

    def get(self):
        if not self.items:
            raise SubjectException("Empty")
        return min(self.items)

    def getAll(self):
        return sorted(self.items)


def make_datastore_subject():
    actions = [
        ActionDescriptor(CONSTRUCTOR, is_constructor=True),
        ActionDescriptor("add", arg_arity=1, returns_bool=True,
                         arg_pool=("x", "y")),
        ActionDescriptor("addAll", arg_arity=1, returns_bool=True,
                         arg_pool=(("x", "y"), ("y", "z"))),
        ActionDescriptor("isEmpty", is_pure=True, returns_bool=True),
        ActionDescriptor("clear"),
        ActionDescriptor("get"),
        ActionDescriptor("getAll"),
    ]
    return Subject("DataStore", actions, _DataStore)


@pytest.fixture(scope="session")
def datastore_subject():
    return make_datastore_subject()
