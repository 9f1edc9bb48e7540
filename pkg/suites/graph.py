"LangGraph chain running every suite for the ``all`` selector."

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Any, TypedDict

from langgraph.graph import END, StateGraph

from core.config import SuiteConfig
from core.scoring import CheckRecord
from suites.base import VerificationSuite

logger = logging.getLogger(__name__)


class SuiteState(TypedDict, total=False):
    config: SuiteConfig
    records: list[CheckRecord]
    completed: list[str]


@dataclass
class VerificationGraph:
    """Runs ``suites`` in order; each node appends its records to the state."""

    suites: list[VerificationSuite]

    def __post_init__(self) -> None:
        if not self.suites:
            raise ValueError("a verification graph needs at least one suite")
        graph = StateGraph(SuiteState)
        for suite in self.suites:
            graph.add_node(suite.name, self._node(suite))
        graph.set_entry_point(self.suites[0].name)
        for current, following in zip(self.suites, self.suites[1:]):
            graph.add_edge(current.name, following.name)
        graph.add_edge(self.suites[-1].name, END)
        self._graph = graph.compile()

    @staticmethod
    def _node(suite: VerificationSuite) -> Any:
        def node(state: SuiteState) -> SuiteState:
            logger.info("running suite %s", suite.name)
            records = suite.run(state["config"])
            return {
                **state,
                "records": [*state.get("records", []), *records],
                "completed": [*state.get("completed", []), suite.name],
            }

        return node

    def run(self, config: SuiteConfig) -> SuiteState:
        return self._graph.invoke({"config": config, "records": [], "completed": []})
