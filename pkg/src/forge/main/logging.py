# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.

import json
import logging
import socket
import traceback


class MozLogFormatter(logging.Formatter):
    """Serialize log records as mozlog JSON lines.

    Values passed through `extra` end up under "Fields". Exact rationals and
    other values json does not know are written with `str`.
    """

    MOZLOG_ENVVERSION = "2.0"

    # Syslog severity levels.
    SL_CRIT = 2
    SL_ERR = 3
    SL_WARNING = 4
    SL_INFO = 6
    SL_DEBUG = 7

    PRIORITY = {
        "DEBUG": SL_DEBUG,
        "INFO": SL_INFO,
        "WARNING": SL_WARNING,
        "ERROR": SL_ERR,
        "CRITICAL": SL_CRIT,
    }

    BUILTIN_LOGRECORD_ATTRIBUTES = frozenset(
        logging.LogRecord("", 0, "", 0, "", (), None).__dict__
    ) | {"asctime", "message"}

    def __init__(self, *args, mozlog_logger: str | None = None, **kwargs):
        self.mozlog_logger = mozlog_logger or "forge"
        self.hostname = socket.gethostname()
        super().__init__(*args, **kwargs)

    def fields(self, record: logging.LogRecord) -> dict:
        fields = {
            key: value
            for key, value in record.__dict__.items()
            if key not in self.BUILTIN_LOGRECORD_ATTRIBUTES
        }
        msg = record.getMessage()
        if msg and "msg" not in fields:
            fields["msg"] = msg
        if record.exc_info is not None:
            fields["exc"] = {
                "error": repr(record.exc_info[1]),
                "traceback": "".join(traceback.format_tb(record.exc_info[2])),
            }
        return fields

    def format(self, record: logging.LogRecord) -> str:
        return self.serialize(
            {
                "EnvVersion": self.MOZLOG_ENVVERSION,
                "Hostname": self.hostname,
                "Logger": self.mozlog_logger,
                "Type": record.name,
                "Timestamp": int(record.created * 1e9),
                "Severity": self.PRIORITY.get(record.levelname, self.SL_WARNING),
                "Pid": record.process,
                "Fields": self.fields(record),
            }
        )

    def serialize(self, mozlog_record: dict) -> str:
        return json.dumps(mozlog_record, sort_keys=True, default=str)


class PrettyMozLogFormatter(MozLogFormatter):
    """A mozlog formatter which pretty prints, for reading logs at a terminal."""

    def serialize(self, mozlog_record: dict) -> str:
        return json.dumps(mozlog_record, sort_keys=True, indent=2, default=str)
