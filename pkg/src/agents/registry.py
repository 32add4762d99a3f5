"""
Registry of agent profiles for a market run.
"""

from typing import Dict, List, Optional

from src.types import Role
from src.agents.profiles import AgentProfile
from src.market.validators import DuplicateAgentError, UnknownAgentError


class AgentRegistry:
    """Holds agent profiles in registration order."""

    def __init__(self, profiles: Optional[List[AgentProfile]] = None):
        self._profiles: Dict[str, AgentProfile] = {}
        for profile in profiles or []:
            self.add(profile)

    def add(self, profile: AgentProfile) -> None:
        """
        Register a profile.

        Raises:
            DuplicateAgentError: If the id is already registered
        """
        if profile.id in self._profiles:
            raise DuplicateAgentError(f"Agent '{profile.id}' is already registered")
        self._profiles[profile.id] = profile

    def get(self, agent_id: str) -> AgentProfile:
        """
        Raises:
            UnknownAgentError: If no profile has the id
        """
        if agent_id not in self._profiles:
            raise UnknownAgentError(f"Agent '{agent_id}' is not registered")
        return self._profiles[agent_id]

    def exists(self, agent_id: str) -> bool:
        return agent_id in self._profiles

    def all(self) -> List[AgentProfile]:
        return list(self._profiles.values())

    def by_role(self, role: Role) -> List[AgentProfile]:
        """Profiles with the given role, in registration order."""
        return [p for p in self._profiles.values() if p.role is role]

    def controller(self) -> AgentProfile:
        """
        The single buying controller.

        Raises:
            UnknownAgentError: If there is not exactly one controller
        """
        controllers = self.by_role(Role.CONTROLLER)
        if len(controllers) != 1:
            raise UnknownAgentError(f"Expected exactly one controller, found {len(controllers)}")
        return controllers[0]
