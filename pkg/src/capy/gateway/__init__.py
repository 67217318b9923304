from .core import Gateway, ModerationRequired, RETRY_PROMPT_MESSAGE, gateway_from_env
from .generation import (
    ACCESSORY_STYLE_SUFFIX,
    CHARACTER_PROMPT_TEMPLATE,
    ComposedPrompt,
    GenerationFailed,
    GenerationJob,
    HttpGen3DProvider,
    InvalidMesh,
    JobNotFound,
    MockGen3DProvider,
    compose_generation_prompt,
)
from .library import AssetLibrary, AssetNotFound, AssetRecord
from .moderation import (
    FAIL_CLOSED_REASON,
    MODERATION_SYSTEM_PROMPT,
    HttpModerationProvider,
    MockModerationProvider,
    ModerationOutcome,
    ModerationVerdict,
    ProviderTimeout,
    TokenIssuer,
    moderate_prompt,
    parse_moderation_response,
)

__all__ = [
    "ACCESSORY_STYLE_SUFFIX",
    "AssetLibrary",
    "AssetNotFound",
    "AssetRecord",
    "CHARACTER_PROMPT_TEMPLATE",
    "ComposedPrompt",
    "FAIL_CLOSED_REASON",
    "Gateway",
    "GenerationFailed",
    "GenerationJob",
    "HttpGen3DProvider",
    "HttpModerationProvider",
    "InvalidMesh",
    "JobNotFound",
    "MODERATION_SYSTEM_PROMPT",
    "MockGen3DProvider",
    "MockModerationProvider",
    "ModerationOutcome",
    "ModerationRequired",
    "ModerationVerdict",
    "ProviderTimeout",
    "RETRY_PROMPT_MESSAGE",
    "TokenIssuer",
    "compose_generation_prompt",
    "gateway_from_env",
    "moderate_prompt",
    "parse_moderation_response",
]
