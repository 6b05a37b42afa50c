"""
WSGI config for platelab (serves the admin of recorded runs).
"""
import os

from django.core.wsgi import get_wsgi_application

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'platelab.settings')

application = get_wsgi_application()
