"""Async SQLAlchemy database context for the results store."""

import logging
from contextlib import asynccontextmanager
from typing import Any, AsyncIterator, Optional, Protocol, Union

from sqlalchemy.ext.asyncio import (
    AsyncEngine,
    AsyncSession,
    async_sessionmaker,
    create_async_engine,
)

from ..config.app_config import DatabaseConfig

logger = logging.getLogger(__name__)


class IDbContext(Protocol):
    """Database context interface."""

    connection_string: str

    async def initialize(self) -> None: ...

    async def close(self) -> None: ...

    async def create_schema(self) -> None: ...

    def session_context(self) -> Any: ...


class DbContext:
    """Owns the async engine and hands out managed sessions."""

    def __init__(self, connection_string_or_config: Union[str, DatabaseConfig]):
        if isinstance(connection_string_or_config, DatabaseConfig):
            self.connection_string = connection_string_or_config.connection_string
        else:
            self.connection_string = connection_string_or_config

        self._engine: Optional[AsyncEngine] = None
        self._session_factory: Optional[async_sessionmaker] = None

    @property
    def is_initialized(self) -> bool:
        return self._engine is not None

    async def initialize(self) -> None:
        if self.is_initialized:
            return
        try:
            self._engine = create_async_engine(self.connection_string, echo=False)
            self._session_factory = async_sessionmaker(
                self._engine,
                expire_on_commit=False,
                class_=AsyncSession,
                autoflush=False,
            )
            logger.debug(f"DbContext initialized with {self.connection_string}")
        except Exception as e:
            logger.error(f"Failed to initialize DbContext: {str(e)}")
            raise

    async def close(self) -> None:
        if self._engine is not None:
            await self._engine.dispose()
            self._engine = None
            self._session_factory = None
            logger.debug("DbContext closed")

    @asynccontextmanager
    async def session_context(self) -> AsyncIterator[AsyncSession]:
        """Managed session; rolled back on error and always closed."""
        await self.initialize()
        assert self._session_factory is not None
        session = self._session_factory()
        try:
            yield session
        except Exception as e:
            await session.rollback()
            logger.error(f"Error in session context: {str(e)}")
            raise
        finally:
            await session.close()

    async def create_schema(self) -> None:
        """Create tables for every registered entity."""
        await self.initialize()

        from .entity import BaseEntity
        from .trial_record import TrialRecord  # noqa: F401  registers the table

        assert self._engine is not None
        async with self._engine.begin() as conn:
            await conn.run_sync(BaseEntity.metadata.create_all)
        logger.info("Database schema created")
