"""
Structured logging and OpenTelemetry tracing for tlmest.

Logging goes through the powertools ``Logger`` (JSON lines on stderr); module loggers
created with ``logging.getLogger(__name__)`` propagate into it because they live under
the ``tlmest`` logger namespace. Tracing is a no-op until ``configure_tracing`` installs
a provider, either because ``OTEL_EXPORTER_OTLP_ENDPOINT`` or ``TLMEST_TRACE_CONSOLE``
is set.
"""

from __future__ import annotations

import logging
import sys
import threading
import time
from contextlib import contextmanager
from typing import Any, Dict, Iterator, Optional

from aws_lambda_powertools import Logger
from opentelemetry import trace
from opentelemetry.trace import Status, StatusCode

from .config import get_settings

SERVICE_NAME = "tlmest"

_lock = threading.Lock()
_logger: Optional[Logger] = None
_tracing_configured = False


def get_logger() -> Logger:
    """Return the process-wide service logger, creating it on first use."""
    global _logger
    with _lock:
        if _logger is None:
            settings = get_settings()
            _logger = Logger(
                service=SERVICE_NAME,
                level=settings.log_level,
                logger_handler=logging.StreamHandler(sys.stderr),
            )
        return _logger


def configure_tracing() -> bool:
    """Install a tracer provider when an exporter is configured.

    Returns:
        True when spans will be exported, False when tracing stays a no-op
    """
    global _tracing_configured
    with _lock:
        if _tracing_configured:
            return True
        settings = get_settings()
        if not (settings.otlp_endpoint or settings.trace_console):
            return False

        from opentelemetry.sdk.resources import Resource
        from opentelemetry.sdk.trace import TracerProvider
        from opentelemetry.sdk.trace.export import (
            BatchSpanProcessor,
            ConsoleSpanExporter,
            SimpleSpanProcessor,
        )

        from tlmest import __version__

        provider = TracerProvider(
            resource=Resource.create({"service.name": SERVICE_NAME, "service.version": __version__})
        )
        if settings.otlp_endpoint:
            from opentelemetry.exporter.otlp.proto.grpc.trace_exporter import OTLPSpanExporter

            provider.add_span_processor(
                BatchSpanProcessor(OTLPSpanExporter(endpoint=settings.otlp_endpoint, insecure=True))
            )
        if settings.trace_console:
            provider.add_span_processor(SimpleSpanProcessor(ConsoleSpanExporter(out=sys.stderr)))
        trace.set_tracer_provider(provider)
        _tracing_configured = True
        return True


def _attribute(value: Any) -> Any:
    if isinstance(value, (bool, int, float, str)):
        return value
    return str(value)


@contextmanager
def traced(name: str, **attributes: Any) -> Iterator[Dict[str, Any]]:
    """
    Context manager wrapping a unit of work in a span.

    Usage:
        with traced("selection.dc_truncated_sparse", sources=K) as info:
            ...
            info["dc_iterations"] = m

    Keys written into the yielded dict are attached to the span on exit, together with
    the elapsed wall time.
    """
    tracer = trace.get_tracer("tlmest")
    info: Dict[str, Any] = {}
    start = time.perf_counter()
    with tracer.start_as_current_span(
        name, attributes={k: _attribute(v) for k, v in attributes.items()}
    ) as span:
        try:
            yield info
            span.set_status(Status(StatusCode.OK))
        except Exception as e:
            span.set_status(Status(StatusCode.ERROR, str(e)))
            span.record_exception(e)
            raise
        finally:
            info.setdefault("seconds", time.perf_counter() - start)
            for key, value in info.items():
                span.set_attribute(f"tlmest.{key}", _attribute(value))


__all__ = ["SERVICE_NAME", "get_logger", "configure_tracing", "traced"]
