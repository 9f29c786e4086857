import logging
import sys
from functools import lru_cache
from typing import Literal

from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


class T2USettings(BaseSettings):
    """
    Process-level settings. Read from the environment (``T2U_`` prefix) and from a
    local ``.env`` file. The MCP variables keep their unprefixed names.
    """

    model_config = SettingsConfigDict(
        env_prefix="T2U_", env_file=".env", extra="ignore"
    )

    log_level: str = "INFO"
    workers: int = Field(default=1, ge=1)
    output_dir: str = "./t2u_output/"

    mcp_server_name: str = Field(default="T2U-MCP", validation_alias="MCP_SERVER_NAME")
    mcp_http_transport: Literal["http", "stdio"] = Field(
        default="stdio", validation_alias="MCP_HTTP_TRANSPORT"
    )
    mcp_port: int = Field(default=8000, validation_alias="MCP_PORT")


@lru_cache(maxsize=1)
def get_settings() -> T2USettings:
    return T2USettings()


def configure_logging(level: str | None = None) -> None:
    logging.basicConfig(
        level=(level or get_settings().log_level).upper(),
        format=LOG_FORMAT,
        stream=sys.stderr,
    )
