# This Source Code Form is subject to the terms of the Mozilla Public
# License, v. 2.0. If a copy of the MPL was not distributed with this
# file, You can obtain one at http://mozilla.org/MPL/2.0/.
import pytest
from django.core.management import call_command


@pytest.fixture
def forge_version():
    # The version file is generated at build time and may be missing in a
    # source checkout.
    call_command("generate_version_file")

    from forge.version import version

    return version
